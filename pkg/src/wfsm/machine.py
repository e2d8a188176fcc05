"""The weighted finite-state machine data model.

A machine is the tuple (alpha, {W^(a)}, omega): start weights, one
nonnegative transition matrix per symbol (the reserved symbol ``eps`` is
always present and behaves like any other symbol), and end weights.  The
machine defines an unnormalized weight over trajectories; the partition
function Z is the total weight of all trajectories, finite exactly when
the total matrix W = sum_a W^(a) has spectral radius below 1.

``build_cache`` computes the quantities every downstream formula reads:
W* = (I - W)^-1, the row vector s = alpha^T W*, the column vector
e = W* omega, and Z = alpha^T W* omega.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import DegenerateMachine, ValidationError

EPSILON = "eps"


class Transition(NamedTuple):
    src: int
    dst: int
    symbol: str


@dataclass(frozen=True)
class Machine:
    """An immutable WFSM.  Use :func:`make_machine` to validate inputs."""

    num_states: int
    symbols: tuple[str, ...]          # includes EPSILON, order fixed
    alpha: np.ndarray                 # (N,) start weights
    omega: np.ndarray                 # (N,) end weights
    trans: Mapping[str, np.ndarray]   # symbol -> (N, N) weights

    @property
    def alphabet_size(self) -> int:
        """Number of symbols excluding the reserved epsilon."""
        return len(self.symbols) - 1

    def symbol_index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ValidationError(f"unknown symbol {symbol!r}") from None


@dataclass(frozen=True)
class KleeneCache:
    """Everything the derivative and expectation formulas consume."""

    wstar: np.ndarray   # (N, N)
    s: np.ndarray       # (N,) = alpha^T W*
    e: np.ndarray       # (N,) = W* omega
    z: float
    rho: float


def make_machine(num_states: int,
                 symbols: Sequence[str],
                 alpha,
                 omega,
                 trans: Mapping[str, object]) -> Machine:
    """Validate and freeze a machine.

    Symbols may omit ``eps``; it is appended with an all-zero matrix.
    Unlisted transition matrices default to zero.  Raises ValidationError
    on negative weights, dimension mismatches, duplicate symbols, or
    all-zero start/end vectors.
    """
    if num_states < 1:
        raise ValidationError(f"need at least one state, got {num_states}")
    syms = list(symbols)
    if len(set(syms)) != len(syms):
        raise ValidationError("duplicate symbol names")
    if EPSILON not in syms:
        syms.append(EPSILON)

    alpha = linalg.as_vector(alpha, name="alpha")
    omega = linalg.as_vector(omega, name="omega")
    if alpha.shape != (num_states,) or omega.shape != (num_states,):
        raise ValidationError("alpha/omega length does not match the state count")
    if np.any(alpha < 0) or np.any(omega < 0):
        raise ValidationError("start/end weights must be nonnegative")
    if not np.any(alpha > 0) or not np.any(omega > 0):
        raise ValidationError("alpha and omega must each have a positive entry, "
                              "otherwise Z = 0 and the distribution is undefined")

    matrices: dict[str, np.ndarray] = {}
    for sym in trans:
        if sym not in syms:
            raise ValidationError(f"transition matrix for unknown symbol {sym!r}")
    zero = linalg.as_matrix(np.zeros((num_states, num_states)))
    for sym in syms:
        if sym in trans:
            m = linalg.as_matrix(trans[sym], name=f"W({sym})")
            if m.shape != (num_states, num_states):
                raise ValidationError(f"W({sym}) has shape {m.shape}, "
                                      f"expected ({num_states}, {num_states})")
            if np.any(m < 0):
                raise ValidationError(f"W({sym}) has negative entries")
            matrices[sym] = m
        else:
            matrices[sym] = zero
    return Machine(num_states, tuple(syms), alpha, omega, matrices)


def machine_from_arcs(num_states: int,
                      symbols: Sequence[str],
                      alpha,
                      omega,
                      arcs: Iterable[tuple[int, int, str, float]]) -> Machine:
    """Build a machine from sparse (src, dst, symbol, weight) arcs."""
    syms = list(symbols)
    if EPSILON not in syms:
        syms.append(EPSILON)
    mats = {sym: np.zeros((num_states, num_states)) for sym in syms}
    for src, dst, sym, weight in arcs:
        if sym not in mats:
            raise ValidationError(f"arc uses unknown symbol {sym!r}")
        if not (0 <= src < num_states and 0 <= dst < num_states):
            raise ValidationError(f"arc ({src}, {dst}) out of range for {num_states} states")
        mats[sym][src, dst] += weight
    return make_machine(num_states, syms, alpha, omega, mats)


def total_matrix(machine: Machine) -> np.ndarray:
    """W = sum over symbols (epsilon included) of W^(a)."""
    total = np.zeros((machine.num_states, machine.num_states))
    for sym in machine.symbols:
        total += machine.trans[sym]
    return total


def build_cache(machine: Machine) -> KleeneCache:
    """Compute rho, W*, s, e, and Z in O(N^3 + A N^2).

    Raises DivergentMachine when rho is not safely below 1 and
    DegenerateMachine when Z is zero or non-finite.
    """
    w = total_matrix(machine)
    rho = linalg.spectral_radius(w)
    wstar = linalg.kleene_star(w)
    s = machine.alpha @ wstar
    e = wstar @ machine.omega
    z = float(machine.alpha @ e)
    if not np.isfinite(z) or z <= 0.0:
        raise DegenerateMachine(f"partition function Z = {z} is not positive and finite")
    return KleeneCache(wstar=wstar, s=s, e=e, z=z, rho=float(rho))


def validate_trajectory(machine: Machine, transitions: Sequence[Transition]) -> None:
    """Check that a transition sequence chains and stays in range."""
    for t in transitions:
        if not (0 <= t.src < machine.num_states and 0 <= t.dst < machine.num_states):
            raise ValidationError(f"transition {t} out of range")
        if t.symbol not in machine.symbols:
            raise ValidationError(f"transition {t} uses unknown symbol")
    for prev, cur in zip(transitions, transitions[1:]):
        if prev.dst != cur.src:
            raise ValidationError(f"trajectory breaks at {prev} -> {cur}")


def trajectory_weight(machine: Machine,
                      transitions: Sequence[Transition],
                      *, at_state: int | None = None) -> float:
    """Weight of a chained trajectory: alpha_i * prod W^(a)_jk * omega_l.

    The empty trajectory at state ``i`` has weight alpha_i * omega_i;
    pass ``at_state`` to select ``i`` (required when the list is empty).
    """
    validate_trajectory(machine, transitions)
    if not transitions:
        if at_state is None:
            raise ValueError("empty trajectory needs at_state")
        return float(machine.alpha[at_state] * machine.omega[at_state])
    weight = machine.alpha[transitions[0].src]
    for t in transitions:
        weight *= machine.trans[t.symbol][t.src, t.dst]
    return float(weight * machine.omega[transitions[-1].dst])


def trajectory_probability(machine: Machine,
                           cache: KleeneCache,
                           transitions: Sequence[Transition],
                           *, at_state: int | None = None) -> float:
    """trajectory_weight / Z."""
    return trajectory_weight(machine, transitions, at_state=at_state) / cache.z
