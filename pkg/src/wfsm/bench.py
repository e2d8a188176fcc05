"""Scaling benchmark: closed-form Hessian vs the slower baselines.

Random machines are drawn with i.i.d. uniform[0, 1) weights and rescaled
so the total matrix has spectral radius 0.5, keeping every method far
from divergence.  Each row records wall time and the max-abs deviation
from the closed-form result, so the report evidences both the complexity
gap and agreement where both methods complete.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import derivatives, oracle
from .expectations import DecomposableFunction, second_order_expectation
from .linalg import spectral_radius
from .machine import Machine, build_cache, make_machine, total_matrix

METHODS = ("closed", "fd", "naive")

#: Dimensions of the random functions used by the "naive" expectation method.
NAIVE_FUNC_DIM = 2


@dataclass(frozen=True)
class BenchRow:
    method: str
    num_states: int
    alphabet: int
    seed: int
    seconds: float
    max_abs_diff: float


def random_machine(num_states: int, alphabet: int, seed: int,
                   target_rho: float = 0.5) -> Machine:
    """Uniform random machine rescaled to the requested spectral radius."""
    rng = np.random.default_rng(seed)
    symbols = [f"s{k}" for k in range(alphabet)]
    mats = {sym: rng.random((num_states, num_states)) for sym in symbols}
    total = sum(mats.values())
    scale = target_rho / spectral_radius(np.asarray(total))
    mats = {sym: m * scale for sym, m in mats.items()}
    alpha = rng.random(num_states)
    omega = rng.random(num_states)
    return make_machine(num_states, symbols, alpha, omega, mats)


def random_function(machine: Machine, dim: int, seed: int,
                    density: int | None = None) -> DecomposableFunction:
    """Random decomposable function with ``density`` nonzeros per transition."""
    rng = np.random.default_rng(seed)
    if density is None:
        density = dim
    entries: dict[tuple[str, int, int], dict[int, float]] = {}
    for sym in machine.symbols:
        mat = machine.trans[sym]
        for src in range(machine.num_states):
            for dst in range(machine.num_states):
                if mat[src, dst] == 0.0:
                    continue
                picks = rng.choice(dim, size=min(density, dim), replace=False)
                entries[(sym, src, dst)] = {
                    int(i): float(rng.normal()) for i in picks}
    return DecomposableFunction.from_entries(dim, entries)


def _time_closed(machine: Machine) -> tuple[float, np.ndarray]:
    start = time.perf_counter()
    cache = build_cache(machine)
    tensor = derivatives.hessian(cache, machine)
    return time.perf_counter() - start, tensor.data


def run_bench(sizes: list[int], alphabet: int, seeds: int,
              methods: list[str]) -> list[BenchRow]:
    """One row per (method, size, seed); closed-form always runs as reference."""
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; pick from {METHODS}")
    rows: list[BenchRow] = []
    for num_states in sizes:
        for seed in range(seeds):
            machine = random_machine(num_states, alphabet, seed)
            closed_seconds, closed_data = _time_closed(machine)
            if "closed" in methods:
                rows.append(BenchRow("closed", num_states, alphabet, seed,
                                     closed_seconds, 0.0))
            if "fd" in methods:
                start = time.perf_counter()
                fd = oracle.fd_hessian(machine)
                seconds = time.perf_counter() - start
                diff = float(np.max(np.abs(fd.data - closed_data)))
                rows.append(BenchRow("fd", num_states, alphabet, seed, seconds, diff))
            if "naive" in methods:
                cache = build_cache(machine)
                r = random_function(machine, NAIVE_FUNC_DIM, seed + 1)
                t = random_function(machine, NAIVE_FUNC_DIM, seed + 2)
                reference = second_order_expectation(cache, machine, r, t).matrix
                start = time.perf_counter()
                naive = oracle.naive_second_order(machine, r, t, cache)
                seconds = time.perf_counter() - start
                diff = float(np.max(np.abs(naive.matrix - reference)))
                rows.append(BenchRow("naive", num_states, alphabet, seed, seconds, diff))
    return rows


def doubling_sizes(min_states: int, max_states: int) -> list[int]:
    sizes = []
    n = min_states
    while n <= max_states:
        sizes.append(n)
        n *= 2
    return sizes


def fit_exponent(rows: list[BenchRow], method: str) -> float:
    """Least-squares slope of log(time) against log(N) for one method."""
    points = [(math.log(row.num_states), math.log(row.seconds))
              for row in rows if row.method == method and row.seconds > 0.0]
    if len(points) < 2:
        raise ValueError(f"not enough timing points for method {method!r}")
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    return float(np.polyfit(xs, ys, 1)[0])
