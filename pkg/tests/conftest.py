import numpy as np
import pytest

from wfsm import build_cache, machine_from_arcs, make_machine
from wfsm.bench import random_function, random_machine


@pytest.fixture
def m1():
    """Single state, one self-loop of weight 0.5: Z = 2."""
    return machine_from_arcs(1, ["a"], [1.0], [1.0], [(0, 0, "a", 0.5)])


@pytest.fixture
def m1_cache(m1):
    return build_cache(m1)


@pytest.fixture
def m2():
    """Two states, two parallel arcs 0 -> 1 (a: 0.3, b: 0.2): Z = 0.5."""
    return machine_from_arcs(2, ["a", "b"], [1.0, 0.0], [0.0, 1.0],
                             [(0, 1, "a", 0.3), (0, 1, "b", 0.2)])


@pytest.fixture
def m2_cache(m2):
    return build_cache(m2)


@pytest.fixture
def m3():
    """Two states, no transitions, alpha = omega = 1: only empty trajectories, Z = 2."""
    return make_machine(2, ["a"], [1.0, 1.0], [1.0, 1.0],
                        {"a": np.zeros((2, 2))})


@pytest.fixture
def m3_cache(m3):
    return build_cache(m3)


@pytest.fixture
def random_suite():
    """20 seeded random machines, N in 2..6, A in 1..3, rho = 0.5."""
    rng = np.random.default_rng(20240817)
    machines = []
    for seed in range(20):
        n = int(rng.integers(2, 7))
        a = int(rng.integers(1, 4))
        machines.append(random_machine(n, a, seed))
    return machines


@pytest.fixture
def random_expect_suite():
    """20 seeded (machine, r, t) triples with R, T <= 4."""
    rng = np.random.default_rng(99)
    triples = []
    for seed in range(20):
        n = int(rng.integers(2, 6))
        a = int(rng.integers(1, 3))
        machine = random_machine(n, a, 1000 + seed)
        r_dim = int(rng.integers(1, 5))
        t_dim = int(rng.integers(1, 5))
        r = random_function(machine, r_dim, 2000 + seed, density=min(2, r_dim))
        t = random_function(machine, t_dim, 3000 + seed, density=min(2, t_dim))
        triples.append((machine, r, t))
    return triples
