"""Closed-form derivatives of the partition function.

Every mixed partial of Z with respect to transition weights is a sum, over
the permutations of the differentiated transitions, of a chain

    s[i'_1] * W*[j'_1, i'_2] * ... * W*[j'_{m-1}, i'_m] * e[j'_m]

read off the cached Kleene star.  The differentiated weight slots
themselves contribute a factor of 1 and only fix which indices the chain
visits, so they are never materialized.  The gradient and Hessian are the
m = 1 and m = 2 specializations; both are filled with one einsum per
permutation, in O(A N^2) and O(A^2 N^4) respectively.

Because the chain does not mention the symbols, derivative values are
identical across symbol axes; the full (A, N, N)^m tensor is still stored
so consumers can index by symbol uniformly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import OrderTooLarge
from .machine import KleeneCache, Machine, Transition

#: Maximum number of elements a dense derivative tensor may occupy.
DEFAULT_ELEMENT_BUDGET = 10**8


@dataclass(frozen=True)
class DerivativeTensor:
    """Dense order-m derivative tensor of Z.

    ``data`` has 3m axes grouped as (symbol, src, dst) per differentiation
    slot, symbols ordered as in the machine.  The tensor is fully
    symmetric under permuting the index triples (mixed partials commute)
    and all entries are nonnegative.
    """

    order: int
    symbols: tuple[str, ...]
    num_states: int
    data: np.ndarray

    def value(self, *triples: tuple[str, int, int]) -> float:
        """Entry for ``order`` (symbol, src, dst) triples."""
        if len(triples) != self.order:
            raise ValueError(f"expected {self.order} index triples, got {len(triples)}")
        idx: list[int] = []
        for sym, src, dst in triples:
            idx.extend((self.symbols.index(sym), src, dst))
        return float(self.data[tuple(idx)])


def _chain_tensor(cache: KleeneCache, order: int) -> np.ndarray:
    """Symbol-free core: tensor over (i_1, j_1, ..., i_m, j_m).

    One einsum per permutation of the differentiation slots.  Axis 2k is
    the source index of slot k, axis 2k + 1 its destination index.
    """
    core: np.ndarray | None = None
    for perm in itertools.permutations(range(order)):
        operands: list[object] = [cache.s, [2 * perm[0]]]
        for a, b in zip(perm, perm[1:]):
            operands += [cache.wstar, [2 * a + 1, 2 * b]]
        operands += [cache.e, [2 * perm[-1] + 1], list(range(2 * order))]
        term = np.einsum(*operands)
        core = term if core is None else core + term
    assert core is not None
    return core


def _with_symbol_axes(core: np.ndarray, num_symbols: int, order: int) -> np.ndarray:
    """Tile the symbol-free core across one symbol axis per slot."""
    n = core.shape[0]
    shape = [1 if k % 3 == 0 else n for k in range(3 * order)]
    target = tuple((num_symbols, n, n) * order)
    return np.ascontiguousarray(np.broadcast_to(core.reshape(shape), target))


def derivative_tensor(cache: KleeneCache,
                      machine: Machine,
                      order: int,
                      element_budget: int = DEFAULT_ELEMENT_BUDGET) -> DerivativeTensor:
    """Materialize the full order-m derivative tensor of Z.

    Duplicate transition tuples accumulate with multiplicity: the
    permutation set is a multiset, so e.g. the diagonal entry for a
    repeated transition sums all m! chain terms.
    """
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    num_symbols = len(machine.symbols)
    n = machine.num_states
    elements = (num_symbols * n * n) ** order
    if elements > element_budget:
        raise OrderTooLarge(f"order-{order} tensor needs {elements} elements, "
                            f"budget is {element_budget}")
    core = _chain_tensor(cache, order)
    return DerivativeTensor(order=order, symbols=machine.symbols, num_states=n,
                            data=_with_symbol_axes(core, num_symbols, order))


def gradient(cache: KleeneCache, machine: Machine) -> DerivativeTensor:
    """dZ / dW^(a)_ij = s_i e_j, for every symbol a."""
    return derivative_tensor(cache, machine, 1)


def hessian(cache: KleeneCache, machine: Machine) -> DerivativeTensor:
    """d2Z / dW^(a)_ij dW^(b)_kl = s_i W*_jk e_l + s_k W*_li e_j."""
    return derivative_tensor(cache, machine, 2)


def tuple_derivative(cache: KleeneCache, tau: Sequence[Transition],
                     machine: Machine) -> float:
    """Single mixed-partial of Z for one specific transition tuple.

    Sums the permutation chains directly without materializing a tensor,
    so it stays cheap for any order (m! terms of m factors each).
    """
    symbol_of = {sym: k for k, sym in enumerate(machine.symbols)}
    for t in tau:
        if t.symbol not in symbol_of:
            raise ValueError(f"unknown symbol in {t}")
    total = 0.0
    for perm in itertools.permutations(tau):
        term = cache.s[perm[0].src]
        for a, b in zip(perm, perm[1:]):
            term *= cache.wstar[a.dst, b.src]
        total += term * cache.e[perm[-1].dst]
    return total


def tuple_marginal(cache: KleeneCache, machine: Machine,
                   tau: Sequence[Transition]) -> float:
    """Expected co-occurrence statistic of a tuple of one or two transitions.

    For a single transition this is its expected count,
    (1/Z) * s_i * e_j * W^(a)_ij.  For a pair, the second-derivative term
    always contributes and the first-derivative correction applies only
    when the two transitions are identical (the diagonal of the pairwise
    table); this is the convention the second-order expectation
    decomposition relies on.  See :func:`tuple_marginal_literal` for the
    order-dependent prefix form.
    """
    m = len(tau)
    if m not in (1, 2):
        raise ValueError(f"tuple_marginal handles 1 or 2 transitions, got {m}")
    weight = math.prod(machine.trans[t.symbol][t.src, t.dst] for t in tau)
    total = tuple_derivative(cache, tau, machine) * weight
    if m == 2 and tau[0] == tau[1]:
        t = tau[0]
        total += tuple_derivative(cache, tau[:1], machine) * machine.trans[t.symbol][t.src, t.dst]
    return total / cache.z


def tuple_marginal_literal(cache: KleeneCache, machine: Machine,
                           tau: Sequence[Transition]) -> float:
    """Prefix-sum form of the tuple marginal.

    Sums, for n = 1..m, the n-th derivative over the first n tuple entries
    times the product of their weights.  For tuples of distinct
    transitions this depends on the tuple ordering (the n < m terms
    involve only a prefix); it is exposed separately so callers can see
    the discrepancy with :func:`tuple_marginal` instead of having it
    silently reconciled.
    """
    m = len(tau)
    if m < 1:
        raise ValueError("need at least one transition")
    total = 0.0
    weight = 1.0
    for n in range(1, m + 1):
        t = tau[n - 1]
        weight *= machine.trans[t.symbol][t.src, t.dst]
        total += tuple_derivative(cache, tau[:n], machine) * weight
    return total / cache.z
