import numpy as np
import pytest

from wfsm import (Transition, build_cache, machine_from_arcs, make_machine,
                  total_matrix, trajectory_probability, trajectory_weight)
from wfsm.errors import DegenerateMachine, DivergentMachine, ValidationError
from wfsm.machine import validate_trajectory


class TestValidation:
    def test_negative_weight_rejected(self):
        with pytest.raises(ValidationError):
            make_machine(1, ["a"], [1.0], [1.0], {"a": [[-0.1]]})

    def test_zero_start_vector_rejected(self):
        with pytest.raises(ValidationError):
            make_machine(1, ["a"], [0.0], [1.0], {"a": [[0.5]]})

    def test_duplicate_symbols_rejected(self):
        with pytest.raises(ValidationError):
            make_machine(1, ["a", "a"], [1.0], [1.0], {})

    def test_out_of_range_arc_rejected(self):
        with pytest.raises(ValidationError):
            machine_from_arcs(2, ["a"], [1.0, 0.0], [0.0, 1.0], [(0, 5, "a", 0.1)])

    def test_epsilon_always_present(self, m1):
        assert "eps" in m1.symbols
        assert m1.alphabet_size == 1

    def test_bad_trajectory_chain(self, m2):
        with pytest.raises(ValidationError):
            validate_trajectory(m2, [Transition(0, 1, "a"), Transition(0, 1, "b")])


class TestTotalMatrix:
    def test_parallel_arcs_sum(self, m2):
        expected = np.zeros((2, 2))
        expected[0, 1] = 0.5
        np.testing.assert_allclose(total_matrix(m2), expected)

    def test_zero_machine(self, m3):
        np.testing.assert_array_equal(total_matrix(m3), np.zeros((2, 2)))

    def test_single_symbol(self, m1):
        np.testing.assert_allclose(total_matrix(m1), [[0.5]])


class TestBuildCache:
    def test_m1_geometric(self, m1_cache):
        np.testing.assert_allclose(m1_cache.wstar, [[2.0]])
        np.testing.assert_allclose(m1_cache.s, [2.0])
        np.testing.assert_allclose(m1_cache.e, [2.0])
        assert m1_cache.z == pytest.approx(2.0)

    def test_m2_single_arc(self, m2_cache):
        assert m2_cache.z == pytest.approx(0.5)
        np.testing.assert_allclose(m2_cache.s, [1.0, 0.5])
        np.testing.assert_allclose(m2_cache.e, [0.5, 1.0])

    def test_m3_empty_trajectories_only(self, m3_cache):
        assert m3_cache.z == pytest.approx(2.0)

    def test_divergent_rejected(self):
        machine = machine_from_arcs(1, ["a"], [1.0], [1.0], [(0, 0, "a", 1.0)])
        with pytest.raises(DivergentMachine):
            build_cache(machine)

    def test_degenerate_rejected(self):
        machine = make_machine(2, ["a"], [1.0, 0.0], [0.0, 1.0],
                               {"a": np.zeros((2, 2))})
        with pytest.raises(DegenerateMachine):
            build_cache(machine)

    def test_invariant_to_symbol_split(self, random_suite):
        # merging all symbol matrices into one leaves W* and Z unchanged
        for machine in random_suite:
            merged = make_machine(machine.num_states, ["m"], machine.alpha,
                                  machine.omega, {"m": total_matrix(machine)})
            a, b = build_cache(machine), build_cache(merged)
            np.testing.assert_allclose(a.wstar, b.wstar, atol=1e-12, rtol=0)
            assert abs(a.z - b.z) <= 1e-12 * max(1.0, abs(a.z))

    def test_length_mass_sums_to_one(self, random_suite):
        for machine in random_suite[:5]:
            cache = build_cache(machine)
            w = total_matrix(machine)
            v = machine.omega.copy()
            mass = 0.0
            for _ in range(2000):
                mass += machine.alpha @ v
                v = w @ v
                if machine.alpha @ v < 1e-16:
                    break
            assert mass / cache.z == pytest.approx(1.0, abs=1e-10)


class TestTrajectoryWeight:
    def test_double_self_loop(self, m1):
        loop = Transition(0, 0, "a")
        assert trajectory_weight(m1, [loop, loop]) == pytest.approx(0.25)

    def test_single_arc(self, m2):
        assert trajectory_weight(m2, [Transition(0, 1, "a")]) == pytest.approx(0.3)

    def test_empty_at_state_with_zero_end(self, m2):
        assert trajectory_weight(m2, [], at_state=0) == 0.0

    def test_probabilities(self, m1, m1_cache, m2, m2_cache):
        loop = Transition(0, 0, "a")
        for k in range(5):
            p = trajectory_probability(m1, m1_cache, [loop] * k, at_state=0)
            assert p == pytest.approx(0.5 ** k / 2.0)
        assert trajectory_probability(m2, m2_cache, [Transition(0, 1, "b")]) \
            == pytest.approx(0.4)
