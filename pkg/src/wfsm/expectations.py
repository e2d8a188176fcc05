"""Expectations of additively decomposable functions over trajectories.

A decomposable function assigns a sparse R-dimensional vector to each
transition; its value on a trajectory is the sum over the transitions
taken.  First-order expectations reduce to single-transition expected
counts.  The second-order expectation E[r t^T] is assembled from four
per-state aggregate vectors

    rs_i = sum_{j,a} s_j W^(a)_ji r^(a)_ji     (mass flowing into i)
    re_i = sum_{j,a} e_j W^(a)_ij r^(a)_ij     (mass flowing out of i)

(and likewise ts, te) plus a same-transition diagonal term, which avoids
ever looping over pairs of transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch
from .machine import KleeneCache, Machine

SparseVec = tuple[tuple[int, float], ...]
TransitionKey = tuple[str, int, int]   # (symbol, src, dst)


@dataclass(frozen=True)
class DecomposableFunction:
    """Per-transition sparse vectors defining an additive trajectory function.

    ``values`` maps (symbol, src, dst) to sorted (index, value) pairs.
    Transitions absent from the map contribute the zero vector.  The
    density bound is recomputed, never trusted from input.
    """

    dim: int
    values: Mapping[TransitionKey, SparseVec]

    @property
    def density(self) -> int:
        """Max nonzeros over any transition (the R' of the complexity bounds)."""
        return max((len(v) for v in self.values.values()), default=0)

    @staticmethod
    def from_entries(dim: int,
                     entries: Mapping[TransitionKey, Mapping[int, float] | list]) -> "DecomposableFunction":
        values: dict[TransitionKey, SparseVec] = {}
        for key, vec in entries.items():
            items = vec.items() if isinstance(vec, Mapping) else vec
            pairs = tuple(sorted((int(i), float(x)) for i, x in items if x != 0.0))
            if pairs:
                values[key] = pairs
        return DecomposableFunction(dim=dim, values=values)

    def scaled(self, factor: float) -> "DecomposableFunction":
        return DecomposableFunction(self.dim, {
            key: tuple((i, factor * x) for i, x in vec)
            for key, vec in self.values.items()})

    def validate_for(self, machine: Machine) -> None:
        for (sym, src, dst), vec in self.values.items():
            if sym not in machine.symbols:
                raise DimensionMismatch(f"function references unknown symbol {sym!r}")
            if not (0 <= src < machine.num_states and 0 <= dst < machine.num_states):
                raise DimensionMismatch(f"function references transition ({src}, {dst}) "
                                        f"outside {machine.num_states} states")
            for i, _ in vec:
                if not 0 <= i < self.dim:
                    raise DimensionMismatch(f"vector index {i} outside dimension {self.dim}")


@dataclass(frozen=True)
class ExpectationAggregates:
    """Per-state aggregate vectors; each has at most min(N * density, dim) nonzeros."""

    r_s: tuple[dict[int, float], ...]
    r_e: tuple[dict[int, float], ...]
    t_s: tuple[dict[int, float], ...]
    t_e: tuple[dict[int, float], ...]


@dataclass(frozen=True)
class ExpectationResult:
    matrix: np.ndarray   # (R, T)
    z: float
    aggregates: ExpectationAggregates | None = field(default=None, compare=False)


def _half_aggregates(cache: KleeneCache, machine: Machine,
                     f: DecomposableFunction) -> tuple[tuple[dict[int, float], ...],
                                                       tuple[dict[int, float], ...]]:
    n = machine.num_states
    into: tuple[dict[int, float], ...] = tuple({} for _ in range(n))
    out_of: tuple[dict[int, float], ...] = tuple({} for _ in range(n))
    for (sym, src, dst), vec in f.values.items():
        w = machine.trans[sym][src, dst]
        if w == 0.0:
            continue
        ws = cache.s[src] * w
        we = cache.e[dst] * w
        for i, x in vec:
            into[dst][i] = into[dst].get(i, 0.0) + ws * x
            out_of[src][i] = out_of[src].get(i, 0.0) + we * x
    return into, out_of


def _dense(states: tuple[dict[int, float], ...], dim: int) -> np.ndarray:
    out = np.zeros((len(states), dim))
    for i, vec in enumerate(states):
        for k, x in vec.items():
            out[i, k] = x
    return out


def first_order_expectation(cache: KleeneCache, machine: Machine,
                            r: DecomposableFunction) -> np.ndarray:
    """E[r] = (1/Z) sum over transitions of s_i W^(a)_ij e_j r^(a)_ij."""
    r.validate_for(machine)
    out = np.zeros(r.dim)
    for (sym, src, dst), vec in r.values.items():
        coeff = cache.s[src] * machine.trans[sym][src, dst] * cache.e[dst]
        for i, x in vec:
            out[i] += coeff * x
    return out / cache.z


def second_order_expectation(cache: KleeneCache, machine: Machine,
                             r: DecomposableFunction,
                             t: DecomposableFunction) -> ExpectationResult:
    """E[r t^T] via the aggregate-vector decomposition.

    Runs in O(N^3 + N^2 (Rbar Tbar + A R' T')) time; the pairwise
    double-loop is never formed.
    """
    r.validate_for(machine)
    t.validate_for(machine)
    r_s, r_e = _half_aggregates(cache, machine, r)
    t_s, t_e = _half_aggregates(cache, machine, t)
    aggregates = ExpectationAggregates(r_s=r_s, r_e=r_e, t_s=t_s, t_e=t_e)

    rs = _dense(r_s, r.dim)
    re = _dense(r_e, r.dim)
    ts = _dense(t_s, t.dim)
    te = _dense(t_e, t.dim)

    # sum_ij rs_i W*_ij te_j^T, plus the transposed (ts, re) counterpart
    # reoriented into (R, T).
    total = np.einsum("ir,ij,jt->rt", rs, cache.wstar, te)
    total += np.einsum("it,ij,jr->rt", ts, cache.wstar, re)

    # Same-transition diagonal term.
    for key, rvec in r.values.items():
        tvec = t.values.get(key)
        if tvec is None:
            continue
        sym, src, dst = key
        coeff = cache.s[src] * machine.trans[sym][src, dst] * cache.e[dst]
        for i, x in rvec:
            for j, y in tvec:
                total[i, j] += coeff * x * y

    return ExpectationResult(matrix=total / cache.z, z=cache.z, aggregates=aggregates)


def covariance(cache: KleeneCache, machine: Machine,
               r: DecomposableFunction) -> np.ndarray:
    """Cov[r] = E[r r^T] - E[r] E[r]^T; symmetric and PSD up to rounding."""
    second = second_order_expectation(cache, machine, r, r).matrix
    first = first_order_expectation(cache, machine, r)
    return second - np.outer(first, first)
