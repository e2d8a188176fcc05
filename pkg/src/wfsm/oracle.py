"""Independent ground-truth routes used for testing and benchmarking.

Three families live here:

* truncated enumeration: Z and trajectory statistics summed over all
  trajectories up to a length cap, by repeated matrix-vector products
  (literal path enumeration is kept only for tiny machines);
* finite-difference derivatives of Z and of the gradient, built on a
  deliberately naive pure-Python Gauss-Jordan inversion so the baseline
  exhibits its A N^5 + A^2 N^4 cost shape at benchmark scale;
* the pairwise-marginal double sum for second-order expectations, the
  slow reference the aggregate-vector algorithm is checked against.

None of these share code with the closed-form paths they validate beyond
the machine data model itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetInsufficient, DivergentMachine, SingularMatrix
from .expectations import DecomposableFunction, ExpectationResult
from .machine import KleeneCache, Machine, Transition, build_cache, total_matrix

FD_GRADIENT_STEP = 1e-6
FD_HESSIAN_STEP = 1e-5

_NAIVE_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class EnumerationBudget:
    """Length cap plus the a-priori bound on the mass beyond it."""

    max_length: int
    tail_bound: float


def plan_enumeration(machine: Machine, cache: KleeneCache, tolerance: float,
                     max_length_cap: int = 200_000) -> EnumerationBudget:
    """Choose the smallest length cap whose tail bound is below ``tolerance``.

    The tail after length L is exactly alpha^T W^(L+1) W* omega, evaluated
    by repeated matrix-vector products against the cached Kleene star.
    Raises BudgetInsufficient when no cap under ``max_length_cap`` works.
    """
    w = total_matrix(machine)
    u = w @ cache.e          # alpha^T u = tail after L = 0
    for length in range(max_length_cap + 1):
        tail = float(machine.alpha @ u)
        if tail < tolerance:
            return EnumerationBudget(max_length=length, tail_bound=tail)
        u = w @ u
    raise BudgetInsufficient(f"tail bound still {tail:.3e} >= {tolerance:.3e} "
                             f"at length {max_length_cap}")


def enumerate_z(machine: Machine, budget: EnumerationBudget) -> float:
    """Sum of alpha^T W^k omega for k = 0..max_length."""
    w = total_matrix(machine)
    v = machine.omega.copy()
    acc = 0.0
    for _ in range(budget.max_length + 1):
        acc += float(machine.alpha @ v)
        v = w @ v
    return acc


def enumerate_trajectories(machine: Machine,
                           max_length: int) -> Iterator[tuple[Transition, ...]]:
    """Literal enumeration of all positive-weight transition chains.

    Exponential; intended for machines with N <= 3 and short caps, as a
    second-tier oracle that also yields per-trajectory statistics.  The
    empty trajectory at each state is emitted as ().
    """
    arcs_from: list[list[Transition]] = [[] for _ in range(machine.num_states)]
    for sym in machine.symbols:
        mat = machine.trans[sym]
        for src, dst in np.argwhere(mat > 0):
            arcs_from[src].append(Transition(int(src), int(dst), sym))

    yield ()
    frontier: list[tuple[Transition, ...]] = [
        (arc,) for state in range(machine.num_states) for arc in arcs_from[state]]
    for depth in range(1, max_length + 1):
        if not frontier:
            return
        yield from frontier
        if depth < max_length:
            frontier = [chain + (arc,) for chain in frontier
                        for arc in arcs_from[chain[-1].dst]]


@dataclass(frozen=True)
class TruncatedStatistics:
    """Unnormalized sums over all trajectories of length <= the cap."""

    z: float
    first_r: np.ndarray    # sum of w(t) * r(t)
    first_t: np.ndarray    # sum of w(t) * t(t)
    second: np.ndarray     # sum of w(t) * r(t) t(t)^T


def truncated_statistics(machine: Machine,
                         r: DecomposableFunction,
                         t: DecomposableFunction,
                         max_length: int) -> TruncatedStatistics:
    """Forward recursion over trajectory lengths carrying (weight, r, t, rt) sums.

    Exactly equal to literal enumeration truncated at ``max_length``, but
    polynomial: each length step is one per-symbol sweep.
    """
    r.validate_for(machine)
    t.validate_for(machine)
    n = machine.num_states
    w = total_matrix(machine)

    def _dense_support(f: DecomposableFunction) -> list[tuple[int, int, float, np.ndarray]]:
        out = []
        for (sym, src, dst), vec in f.values.items():
            weight = machine.trans[sym][src, dst]
            if weight == 0.0:
                continue
            dense = np.zeros(f.dim)
            for i, x in vec:
                dense[i] = x
            out.append((src, dst, float(weight), dense))
        return out

    r_support = _dense_support(r)
    t_support = _dense_support(t)
    shared: list[tuple[int, int, float, np.ndarray, np.ndarray]] = []
    t_by_key = {(sym, src, dst): vec for (sym, src, dst), vec in t.values.items()}
    for (sym, src, dst), rvec in r.values.items():
        tvec = t_by_key.get((sym, src, dst))
        weight = machine.trans[sym][src, dst]
        if tvec is None or weight == 0.0:
            continue
        dr = np.zeros(r.dim)
        for i, x in rvec:
            dr[i] = x
        dt = np.zeros(t.dim)
        for i, x in tvec:
            dt[i] = x
        shared.append((src, dst, float(weight), dr, dt))

    z_states = machine.alpha.copy()
    mr = np.zeros((n, r.dim))
    mt = np.zeros((n, t.dim))
    second = np.zeros((n, r.dim, t.dim))

    acc_z = 0.0
    acc_r = np.zeros(r.dim)
    acc_t = np.zeros(t.dim)
    acc_m = np.zeros((r.dim, t.dim))
    for step in range(max_length + 1):
        acc_z += float(z_states @ machine.omega)
        acc_r += mr.T @ machine.omega
        acc_t += mt.T @ machine.omega
        acc_m += np.einsum("i,irt->rt", machine.omega, second)
        if step == max_length:
            break
        new_second = np.einsum("ij,irt->jrt", w, second)
        new_mr = w.T @ mr
        new_mt = w.T @ mt
        for src, dst, weight, dense in r_support:
            new_mr[dst] += z_states[src] * weight * dense
            new_second[dst] += weight * np.outer(dense, mt[src])
        for src, dst, weight, dense in t_support:
            new_mt[dst] += z_states[src] * weight * dense
            new_second[dst] += weight * np.outer(mr[src], dense)
        for src, dst, weight, dr, dt in shared:
            new_second[dst] += z_states[src] * weight * np.outer(dr, dt)
        z_states = w.T @ z_states
        mr, mt, second = new_mr, new_mt, new_second
    return TruncatedStatistics(z=acc_z, first_r=acc_r, first_t=acc_t, second=acc_m)


# ---------------------------------------------------------------------------
# Naive pure-Python substrate for the finite-difference baselines.  Kept free
# of numpy on purpose: the point of these baselines is to exhibit the cost of
# one full O(N^3) inversion per gradient evaluation.


def _gauss_jordan_inverse(a: list[list[float]]) -> list[list[float]]:
    """Textbook in-place Gauss-Jordan inversion without row exchanges.

    ``a`` must be (a perturbation of) I - W for a summable machine; such
    matrices are nonsingular M-matrices, for which elimination without
    pivoting is stable and every pivot stays positive.  ``a`` is destroyed.
    """
    n = len(a)
    inv = [[0.0] * n for _ in range(n)]
    for i in range(n):
        inv[i][i] = 1.0
    for k in range(n):
        pivot = a[k][k]
        if not abs(pivot) > _NAIVE_PIVOT_TOL:
            raise SingularMatrix(f"naive inversion pivot below {_NAIVE_PIVOT_TOL:.0e}")
        scale = 1.0 / pivot
        j = 0
        while j < n:
            a[k][j] *= scale
            inv[k][j] *= scale
            j += 1
        for row in range(n):
            if row == k:
                continue
            f = a[row][k]
            j = 0
            while j < n:
                a[row][j] -= f * a[k][j]
                inv[row][j] -= f * inv[k][j]
                j += 1
    return inv


def _system_rows(machine: Machine) -> list[list[float]]:
    """Rows of I - W for the naive solvers; callers copy before perturbing."""
    n = machine.num_states
    w = total_matrix(machine)
    return [[(1.0 if i == j else 0.0) - w[i, j] for j in range(n)] for i in range(n)]


def _naive_start_end(alpha: Sequence[float], omega: Sequence[float],
                     a: list[list[float]]) -> tuple[list[float], list[float]]:
    """(s, e) = (alpha^T W*, W* omega); ``a`` holds I - W and is destroyed."""
    try:
        wstar = _gauss_jordan_inverse(a)
    except SingularMatrix as exc:
        raise DivergentMachine(f"perturbed machine is not summable: {exc}") from exc
    n = len(wstar)
    s = [0.0] * n
    e = [0.0] * n
    for i in range(n):
        ai = alpha[i]
        row = wstar[i]
        acc = 0.0
        for j in range(n):
            s[j] += ai * row[j]
            acc += row[j] * omega[j]
        e[i] = acc
    return s, e


def _naive_z(alpha: Sequence[float], omega: Sequence[float],
             a: list[list[float]]) -> float:
    s, _ = _naive_start_end(alpha, omega, a)
    return sum(si * oi for si, oi in zip(s, omega))


def fd_gradient(machine: Machine, h: float = FD_GRADIENT_STEP):
    """Central differences of Z per transition weight.

    Weights that cannot be lowered by ``h`` without going negative fall
    back to a one-sided forward difference.
    """
    from .derivatives import DerivativeTensor

    n = machine.num_states
    alpha = machine.alpha.tolist()
    omega = machine.omega.tolist()
    base_rows = _system_rows(machine)
    num_symbols = len(machine.symbols)
    data = np.zeros((num_symbols, n, n) * 1)
    z_base: float | None = None
    for b, sym in enumerate(machine.symbols):
        mat = machine.trans[sym]
        for k in range(n):
            for l in range(n):
                a = [row[:] for row in base_rows]
                a[k][l] -= h
                z_plus = _naive_z(alpha, omega, a)
                if mat[k, l] - h >= 0.0:
                    a = [row[:] for row in base_rows]
                    a[k][l] += h
                    data[b, k, l] = (z_plus - _naive_z(alpha, omega, a)) / (2.0 * h)
                else:
                    if z_base is None:
                        z_base = _naive_z(alpha, omega,
                                          [row[:] for row in base_rows])
                    data[b, k, l] = (z_plus - z_base) / h
    return DerivativeTensor(order=1, symbols=machine.symbols, num_states=n, data=data)


def fd_hessian(machine: Machine, h: float = FD_HESSIAN_STEP):
    """Central differences of the closed-form gradient, one naive inversion per step.

    2 A N^2 gradient evaluations of O(N^3) each: the reverse-mode-shaped
    O(A N^5 + A^2 N^4) baseline.
    """
    from .derivatives import DerivativeTensor

    n = machine.num_states
    alpha = machine.alpha.tolist()
    omega = machine.omega.tolist()
    base_rows = _system_rows(machine)
    num_symbols = len(machine.symbols)
    # keep the per-column loop down to the two naive inversions; extracting
    # s and e, the outer products, and the symbol-axis broadcast all happen
    # vectorized afterwards
    plus_stars: list[list[list[float]]] = []
    minus_stars: list[list[list[float]]] = []
    scales: list[float] = []
    base_star: list[list[float]] | None = None
    try:
        for sym in machine.symbols:
            mat_rows = machine.trans[sym].tolist()
            for k in range(n):
                for l in range(n):
                    a = [row[:] for row in base_rows]
                    a[k][l] -= h
                    plus_stars.append(_gauss_jordan_inverse(a))
                    if mat_rows[k][l] - h >= 0.0:
                        a = [row[:] for row in base_rows]
                        a[k][l] += h
                        minus_stars.append(_gauss_jordan_inverse(a))
                        scales.append(0.5 / h)
                    else:
                        if base_star is None:
                            base_star = _gauss_jordan_inverse(
                                [row[:] for row in base_rows])
                        minus_stars.append(base_star)
                        scales.append(1.0 / h)
    except SingularMatrix as exc:
        raise DivergentMachine(f"perturbed machine is not summable: {exc}") from exc

    alpha_v = np.asarray(alpha)
    omega_v = np.asarray(omega)
    p_stars = np.asarray(plus_stars)
    m_stars = np.asarray(minus_stars)
    sp = alpha_v @ p_stars
    ep = p_stars @ omega_v
    sm = alpha_v @ m_stars
    em = m_stars @ omega_v
    scale = np.array(scales)[:, None, None]
    columns = (sp[:, :, None] * ep[:, None, :] - sm[:, :, None] * em[:, None, :]) * scale
    # columns[c, i, j] with c enumerating (b, k, l); reorder to (i, j, b, k, l)
    # then broadcast over the leading symbol axis, which the hole convention
    # leaves constant
    by_col = np.moveaxis(columns.reshape(num_symbols, n, n, n, n), (3, 4), (0, 1))
    data = np.ascontiguousarray(np.broadcast_to(by_col, (num_symbols,) + by_col.shape))
    return DerivativeTensor(order=2, symbols=machine.symbols, num_states=n, data=data)


def naive_second_order(machine: Machine,
                       r: DecomposableFunction,
                       t: DecomposableFunction,
                       cache: KleeneCache | None = None) -> ExpectationResult:
    """E[r t^T] by the pairwise-marginal double sum, without aggregates.

    O(A^2 N^4 R' T') over the dense support: every (transition, transition)
    pair contributes its second-derivative chain, plus first-derivative
    terms on the diagonal.
    """
    r.validate_for(machine)
    t.validate_for(machine)
    if cache is None:
        cache = build_cache(machine)
    s, e, wstar = cache.s, cache.e, cache.wstar
    total = np.zeros((r.dim, t.dim))
    for (sym1, i, j), rvec in r.values.items():
        w1 = machine.trans[sym1][i, j]
        if w1 == 0.0:
            continue
        for (sym2, k, l), tvec in t.values.items():
            w2 = machine.trans[sym2][k, l]
            if w2 == 0.0:
                continue
            chain = s[i] * wstar[j, k] * e[l] + s[k] * wstar[l, i] * e[j]
            coeff = chain * w1 * w2
            for ri, rx in rvec:
                for ti, tx in tvec:
                    total[ri, ti] += coeff * rx * tx
    for key, rvec in r.values.items():
        tvec = t.values.get(key)
        if tvec is None:
            continue
        sym, i, j = key
        coeff = s[i] * e[j] * machine.trans[sym][i, j]
        for ri, rx in rvec:
            for ti, tx in tvec:
                total[ri, ti] += coeff * rx * tx
    return ExpectationResult(matrix=total / cache.z, z=cache.z)
