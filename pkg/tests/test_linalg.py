import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfsm import linalg
from wfsm.errors import DivergentMachine, SingularMatrix


class TestInvert:
    def test_identity(self):
        np.testing.assert_array_equal(linalg.invert(np.eye(3)), np.eye(3))

    def test_scalar_reciprocal(self):
        np.testing.assert_allclose(linalg.invert(np.array([[0.5]])), [[2.0]])

    def test_unit_upper_triangular(self):
        m = np.array([[1.0, 0.5], [0.0, 1.0]])
        np.testing.assert_allclose(linalg.invert(m), [[1.0, -0.5], [0.0, 1.0]])

    def test_residual_below_tolerance(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            m = rng.normal(size=(6, 6)) + 6 * np.eye(6)
            residual = np.max(np.abs(m @ linalg.invert(m) - np.eye(6)))
            assert residual < 1e-9

    def test_singular_raises(self):
        with pytest.raises(SingularMatrix):
            linalg.invert(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            linalg.invert(np.zeros((2, 3)))

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_double_inverse_roundtrip(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        m = rng.normal(size=(n, n)) + n * np.eye(n)
        np.testing.assert_allclose(linalg.invert(linalg.invert(m)), m, rtol=1e-8)


class TestSpectralRadius:
    def test_scalar(self):
        assert linalg.spectral_radius(np.array([[0.5]])) == pytest.approx(0.5)

    def test_zero_matrix(self):
        assert linalg.spectral_radius(np.zeros((2, 2))) == 0.0

    def test_nilpotent(self):
        assert linalg.spectral_radius(np.array([[0.0, 0.5], [0.0, 0.0]])) == 0.0

    def test_random_nonnegative_matches_eig(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n = int(rng.integers(2, 9))
            m = rng.random((n, n))
            expected = np.max(np.abs(np.linalg.eigvals(m)))
            assert linalg.spectral_radius(m) == pytest.approx(expected, rel=1e-7)


class TestKleeneStar:
    def test_zero_matrix_is_identity(self):
        np.testing.assert_array_equal(linalg.kleene_star(np.zeros((2, 2))), np.eye(2))

    def test_geometric_series_scalar(self):
        np.testing.assert_allclose(linalg.kleene_star(np.array([[0.5]])), [[2.0]])

    def test_nilpotent(self):
        w = np.array([[0.0, 0.5], [0.0, 0.0]])
        np.testing.assert_allclose(linalg.kleene_star(w), np.eye(2) + w)

    def test_divergent_raises(self):
        with pytest.raises(DivergentMachine):
            linalg.kleene_star(np.array([[1.0]]))
        with pytest.raises(DivergentMachine):
            linalg.kleene_star(np.full((3, 3), 0.4))

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_matches_truncated_power_series(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 9))
        w = rng.random((n, n))
        rho = linalg.spectral_radius(w)
        w *= (0.1 + 0.8 * rng.random()) / max(rho, 1e-12)
        rho = linalg.spectral_radius(w)
        # pick L so the geometric tail bound drops below 1e-10
        length = 1
        while rho ** (length + 1) * n / (1.0 - rho) >= 1e-10:
            length += 1
        bound = rho ** (length + 1) * n / (1.0 - rho)
        partial = np.zeros((n, n))
        power = np.eye(n)
        for _ in range(length + 1):
            partial += power
            power = power @ w
        # slack for rounding: at n = 1 the bound is the exact tail itself
        assert np.max(np.abs(linalg.kleene_star(w) - partial)) \
            <= bound * (1.0 + 1e-6) + 1e-13

    def test_diagonal_at_least_one_offdiagonal_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.integers(1, 8))
            w = rng.random((n, n))
            w *= 0.8 / linalg.spectral_radius(w)
            star = linalg.kleene_star(w)
            assert np.all(np.diag(star) >= 1.0)
            assert np.all(star >= 0.0)


class TestValidators:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            linalg.as_matrix([[np.nan, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            linalg.as_vector([np.inf])

    def test_result_is_read_only(self):
        m = linalg.as_matrix([[1.0]])
        with pytest.raises(ValueError):
            m[0, 0] = 2.0
