import math

import numpy as np
import pytest

from wfsm import build_cache, machine_from_arcs
from wfsm.derivatives import (derivative_tensor, gradient, hessian, tuple_derivative,
                              tuple_marginal, tuple_marginal_literal)
from wfsm.errors import OrderTooLarge
from wfsm.machine import Transition
from wfsm.oracle import fd_gradient, fd_hessian


class TestGradient:
    def test_m1_analytic(self, m1, m1_cache):
        # d/dw 1/(1-w) = 1/(1-w)^2 = 4 at w = 0.5
        g = gradient(m1_cache, m1)
        assert g.value(("a", 0, 0)) == pytest.approx(4.0)

    def test_m2_linear_arc(self, m2, m2_cache):
        g = gradient(m2_cache, m2)
        assert g.value(("a", 0, 1)) == pytest.approx(1.0)

    def test_m3_outer_product(self, m3, m3_cache):
        g = gradient(m3_cache, m3)
        for i in range(2):
            for j in range(2):
                assert g.value(("a", i, j)) == pytest.approx(1.0)

    def test_identical_across_symbols(self, m2, m2_cache):
        g = gradient(m2_cache, m2).data
        for k in range(1, g.shape[0]):
            np.testing.assert_array_equal(g[0], g[k])

    def test_matches_finite_differences(self, random_suite):
        for machine in random_suite:
            cache = build_cache(machine)
            closed = gradient(cache, machine).data
            approx = fd_gradient(machine, h=1e-6).data
            np.testing.assert_allclose(approx, closed, rtol=1e-4)


class TestHessian:
    def test_m1_analytic(self, m1, m1_cache):
        # d2/dw2 1/(1-w) = 2/(1-w)^3 = 16 at w = 0.5
        h = hessian(m1_cache, m1)
        assert h.value(("a", 0, 0), ("a", 0, 0)) == pytest.approx(16.0)

    def test_m2_acyclic_exclusion(self, m2, m2_cache):
        # no trajectory can use both 0->1 arcs, so the mixed partial is 0
        h = hessian(m2_cache, m2)
        assert h.value(("a", 0, 1), ("b", 0, 1)) == 0.0

    def test_matches_finite_differences(self, random_suite):
        for machine in random_suite:
            cache = build_cache(machine)
            closed = hessian(cache, machine).data
            approx = fd_hessian(machine, h=1e-5).data
            np.testing.assert_allclose(approx, closed, rtol=1e-4, atol=1e-7)

    def test_exact_triple_swap_symmetry(self, random_suite):
        for machine in random_suite[:8]:
            cache = build_cache(machine)
            data = hessian(cache, machine).data
            swapped = data.transpose(3, 4, 5, 0, 1, 2)
            np.testing.assert_array_equal(data, swapped)

    def test_nonnegative_entries(self, random_suite):
        for machine in random_suite[:5]:
            cache = build_cache(machine)
            assert np.all(hessian(cache, machine).data >= 0.0)


class TestDerivativeTensor:
    def test_m1_orders(self, m1, m1_cache):
        # d^m/dw^m 1/(1-w) = m!/(1-w)^(m+1)
        for order in range(1, 5):
            expected = math.factorial(order) * 2.0 ** (order + 1)
            got = derivative_tensor(m1_cache, m1, order).data.ravel()[0]
            assert got == pytest.approx(expected, rel=1e-10)

    def test_order_one_equals_gradient(self, m2, m2_cache):
        np.testing.assert_array_equal(derivative_tensor(m2_cache, m2, 1).data,
                                      gradient(m2_cache, m2).data)

    def test_order_two_equals_hessian(self, random_suite):
        for machine in random_suite[:5]:
            cache = build_cache(machine)
            np.testing.assert_array_equal(derivative_tensor(cache, machine, 2).data,
                                          hessian(cache, machine).data)

    def test_order_three_matches_fd_of_hessian(self, m1, m1_cache):
        h = 1e-4
        plus = machine_from_arcs(1, ["a"], [1.0], [1.0], [(0, 0, "a", 0.5 + h)])
        minus = machine_from_arcs(1, ["a"], [1.0], [1.0], [(0, 0, "a", 0.5 - h)])
        fd3 = (hessian(build_cache(plus), plus).data.ravel()[0]
               - hessian(build_cache(minus), minus).data.ravel()[0]) / (2 * h)
        got = derivative_tensor(m1_cache, m1, 3).data.ravel()[0]
        assert got == pytest.approx(fd3, rel=1e-6)

    def test_budget_enforced(self, m2, m2_cache):
        with pytest.raises(OrderTooLarge):
            derivative_tensor(m2_cache, m2, 8, element_budget=10_000)

    def test_full_symmetry_order_three(self, random_suite):
        machine = random_suite[0]
        cache = build_cache(machine)
        data = derivative_tensor(cache, machine, 3).data
        perm = data.transpose(6, 7, 8, 0, 1, 2, 3, 4, 5)
        np.testing.assert_allclose(data, perm, rtol=1e-12, atol=1e-12)


class TestTupleMarginal:
    def test_m1_expected_length(self, m1, m1_cache):
        # E[k] for p(k) = 0.5^k / 2 is 1
        loop = Transition(0, 0, "a")
        assert tuple_marginal(m1_cache, m1, [loop]) == pytest.approx(1.0)

    def test_m2_arc_posterior(self, m2, m2_cache):
        assert tuple_marginal(m2_cache, m2, [Transition(0, 1, "a")]) \
            == pytest.approx(0.6)

    def test_m1_second_moment(self, m1, m1_cache):
        # E[k^2] = sum k^2 0.5^k / 2 = 3
        loop = Transition(0, 0, "a")
        assert tuple_marginal(m1_cache, m1, [loop, loop]) == pytest.approx(3.0)

    def test_moments_against_truncated_series(self, m1, m1_cache):
        first = sum(k * 0.5 ** k / 2.0 for k in range(200))
        second = sum(k * k * 0.5 ** k / 2.0 for k in range(200))
        loop = Transition(0, 0, "a")
        assert tuple_marginal(m1_cache, m1, [loop]) == pytest.approx(first, abs=1e-12)
        assert tuple_marginal(m1_cache, m1, [loop, loop]) \
            == pytest.approx(second, abs=1e-12)

    def test_literal_matches_on_identical_pairs(self, m1, m1_cache):
        loop = Transition(0, 0, "a")
        assert tuple_marginal_literal(m1_cache, m1, [loop, loop]) \
            == pytest.approx(tuple_marginal(m1_cache, m1, [loop, loop]))

    def test_literal_adds_prefix_term_on_distinct_pairs(self, m2, m2_cache):
        # for distinct transitions the prefix form keeps the first-order term
        a, b = Transition(0, 1, "a"), Transition(0, 1, "b")
        assert tuple_marginal(m2_cache, m2, [a, b]) == pytest.approx(0.0)
        first_order = tuple_derivative(m2_cache, [a], m2) * 0.3 / m2_cache.z
        assert tuple_marginal_literal(m2_cache, m2, [a, b]) \
            == pytest.approx(first_order)

    def test_summed_marginals_equal_expected_length(self, random_suite):
        from wfsm.expectations import DecomposableFunction
        from wfsm.oracle import truncated_statistics
        for machine in random_suite[:6]:
            cache = build_cache(machine)
            total = 0.0
            for sym in machine.symbols:
                mat = machine.trans[sym]
                for i in range(machine.num_states):
                    for j in range(machine.num_states):
                        if mat[i, j] > 0.0:
                            total += tuple_marginal(cache, machine,
                                                    [Transition(i, j, sym)])
            ones = DecomposableFunction.from_entries(1, {
                (sym, i, j): {0: 1.0}
                for sym in machine.symbols
                for i in range(machine.num_states)
                for j in range(machine.num_states)
                if machine.trans[sym][i, j] > 0.0})
            stats = truncated_statistics(machine, ones, ones, 120)
            assert total == pytest.approx(stats.first_r[0] / cache.z, abs=1e-6)
