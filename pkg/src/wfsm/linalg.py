"""Dense real matrix/vector kernels.

Everything downstream (Kleene star, derivative chains, expectation
aggregates) is built on plain float64 numpy arrays.  The helpers here add
the validation and failure modes the rest of the package relies on: finite
entries on construction, an LU inversion that reports singularity instead
of returning garbage, and a power-iteration spectral radius estimate used
to decide whether the geometric series sum(W^k) converges.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DivergentMachine, SingularMatrix

# Module-level tolerance knobs.  The defaults are what every caller in the
# package uses; tests may monkeypatch them.
PIVOT_TOL = 1e-12
POWER_TOL = 1e-10
POWER_MAX_ITER = 200
DIVERGENCE_MARGIN = 1e-9


def as_vector(values, *, name: str = "vector") -> np.ndarray:
    """Coerce to a read-only float64 vector, rejecting NaN/Inf."""
    v = np.array(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    v.setflags(write=False)
    return v


def as_matrix(values, *, name: str = "matrix") -> np.ndarray:
    """Coerce to a read-only float64 matrix, rejecting NaN/Inf."""
    m = np.array(values, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    m.setflags(write=False)
    return m


def lu_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """LU factorization with partial pivoting: returns (lu, perm).

    ``lu`` stores L below the diagonal (unit diagonal implied) and U on and
    above it; ``perm`` is the row permutation applied to ``m``.  Raises
    SingularMatrix when the best available pivot falls below PIVOT_TOL.
    """
    n = m.shape[0]
    lu = np.array(m, dtype=np.float64)
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < PIVOT_TOL:
            raise SingularMatrix(f"pivot {lu[p, k]:.3e} below {PIVOT_TOL:.0e} at column {k}")
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        lu[k + 1:, k] /= lu[k, k]
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm


def lu_solve(lu: np.ndarray, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given the factorization from :func:`lu_factor`.

    ``b`` may be a vector or a matrix of stacked right-hand-side columns.
    """
    n = lu.shape[0]
    x = np.array(b, dtype=np.float64)[perm]
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - lu[k, k + 1:] @ x[k + 1:]) / lu[k, k]
    return x


def invert(m: np.ndarray) -> np.ndarray:
    """Invert a square matrix by LU with partial pivoting.

    Raises SingularMatrix when a pivot magnitude falls below PIVOT_TOL.
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"cannot invert non-square matrix of shape {m.shape}")
    lu, perm = lu_factor(m)
    return lu_solve(lu, perm, np.eye(m.shape[0]))


def spectral_radius(m: np.ndarray,
                    tol: float | None = None,
                    max_iter: int | None = None) -> float:
    """Estimate the largest-magnitude eigenvalue by power iteration.

    Assumes nonnegative entries, which makes the dominant eigenvalue real
    and the iteration reliable from a strictly positive start vector.
    Convergence means successive Rayleigh estimates differ by less than
    ``tol``; otherwise the last estimate is returned with a warning.
    """
    if tol is None:
        tol = POWER_TOL
    if max_iter is None:
        max_iter = POWER_MAX_ITER
    n = m.shape[0]
    x = np.full(n, 1.0 / np.sqrt(n))
    rho = 0.0
    for _ in range(max_iter):
        y = m @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            # The iterate died: m is nilpotent on the positive cone, so
            # every eigenvalue is 0.
            return 0.0
        estimate = x @ y
        x = y / norm
        if abs(estimate - rho) < tol:
            return estimate
        rho = estimate
    warnings.warn(f"power iteration did not converge within {max_iter} iterations "
                  f"(last estimate {rho:.6g})", RuntimeWarning, stacklevel=2)
    return rho


def kleene_star(w: np.ndarray) -> np.ndarray:
    """Return sum(W^k) = (I - W)^-1 for a nonnegative contraction W."""
    rho = spectral_radius(w)
    if rho >= 1.0 - DIVERGENCE_MARGIN:
        raise DivergentMachine(f"spectral radius {rho:.12g} is not safely below 1")
    try:
        return invert(np.eye(w.shape[0]) - w)
    except SingularMatrix as exc:
        raise DivergentMachine(f"I - W is numerically singular: {exc}") from exc
