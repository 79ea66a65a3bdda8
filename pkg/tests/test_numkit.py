import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.polynomial import Polynomial
from numpy.testing import assert_allclose
from scipy.linalg import solve_continuous_are, solve_continuous_lyapunov

from vssea.core.numkit import (
    DimensionError,
    IntegrationError,
    SynthesisError,
    care_residual,
    chain_polynomial,
    characteristic_polynomial,
    controllability_rank,
    is_hurwitz,
    is_positive_definite,
    lyapunov_residual,
    newton_kleinman,
    numerical_rank,
    place_poles_siso,
    pole_place_chain,
    rhp_root_count,
    rk4_step,
    routh_array,
    routh_hurwitz,
    solve_care,
    solve_lyapunov,
)
from vssea.core.reconstruction import gamma_model


class TestControllability:
    def test_chain_model_full_rank(self):
        gamma, B = gamma_model(1.0)
        assert controllability_rank(gamma, B) == 4

    def test_zero_system(self):
        assert controllability_rank(np.zeros((2, 2)), np.zeros((2, 1))) == 0

    def test_double_integrator(self):
        assert controllability_rank([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]]) == 2

    def test_uncontrollable_mode(self):
        A = np.diag([-1.0, -2.0])
        B = np.array([[1.0], [0.0]])
        assert controllability_rank(A, B) == 1

    def test_rank_is_scale_invariant(self):
        M = np.array([[1e-12, 0.0], [0.0, 2e-12]])
        assert numerical_rank(M) == 2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            controllability_rank(np.eye(3), np.ones((2, 1)))


class TestLyapunov:
    def test_negative_identity(self):
        P = solve_lyapunov(-np.eye(2), np.eye(2))
        assert_allclose(P, 0.5 * np.eye(2), atol=1e-14)

    def test_scalar(self):
        P = solve_lyapunov([[-3.0]], [[6.0]])
        assert P[0, 0] == pytest.approx(1.0)

    def test_companion_matches_brute_force(self):
        A = np.array([[0.0, 1.0], [-2.0, -3.0]])
        # unknowns p11, p12, p22 of A^T P + P A = -I
        M = np.array([
            [0.0, -4.0, 0.0],
            [1.0, -3.0, -2.0],
            [0.0, 2.0, -6.0],
        ])
        p11, p12, p22 = np.linalg.solve(M, [-1.0, 0.0, -1.0])
        P = solve_lyapunov(A, np.eye(2))
        assert_allclose(P, [[p11, p12], [p12, p22]], rtol=1e-12)
        assert lyapunov_residual(A, P, np.eye(2)) <= 1e-9 * math.sqrt(2)

    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        A = rng.normal(size=(4, 4)) - 5.0 * np.eye(4)
        Q = np.eye(4)
        expected = solve_continuous_lyapunov(A.T, -Q)
        assert_allclose(solve_lyapunov(A, Q), expected, rtol=1e-9, atol=1e-12)

    def test_singular_system(self):
        # eigenvalues +1 and -1 sum to zero
        with pytest.raises(SynthesisError):
            solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))

    def test_positive_definite(self):
        assert is_positive_definite(np.eye(3))
        assert not is_positive_definite(np.diag([1.0, -1.0]))


class TestRouthHurwitz:
    def test_first_order(self):
        assert routh_hurwitz(Polynomial([1.0, 1.0]))

    def test_triple_root(self):
        assert routh_hurwitz(Polynomial([1.0, 3.0, 3.0, 1.0]))

    def test_cubic_violating_product_rule(self):
        # s^3 + s^2 + s + 2
        p = Polynomial([2.0, 1.0, 1.0, 1.0])
        assert not routh_hurwitz(p)
        assert np.max(p.roots().real) > 0

    def test_imaginary_axis_is_not_hurwitz(self):
        # s^2 + 1
        assert not routh_hurwitz(Polynomial([1.0, 0.0, 1.0]))

    def test_zero_leading_coefficient(self):
        with pytest.raises(ValueError):
            routh_hurwitz(Polynomial([1.0, 2.0, 0.0]))

    def test_rhp_count(self):
        # (s - 1)(s - 2)(s + 3)
        p = Polynomial.fromroots([1.0, 2.0, -3.0])
        assert rhp_root_count(p) == 2

    def test_rhp_count_with_zero_pivot(self):
        # s^4 + s^3 + 2 s^2 + 2 s + 3 has a zero first entry in its third row
        p = Polynomial([3.0, 2.0, 2.0, 1.0, 1.0])
        assert routh_array(p)[2][0] != 0.0
        assert rhp_root_count(p) == int(np.sum(p.roots().real > 0))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-10.0, 10.0, allow_nan=False), min_size=2, max_size=5))
    def test_agrees_with_roots(self, lower):
        p = Polynomial([*lower, 1.0])
        roots = p.roots()
        assume(np.min(np.abs(roots.real)) > 1e-3)
        assert routh_hurwitz(p) == bool(np.all(roots.real < 0))

    def test_matrix_hurwitz(self):
        assert is_hurwitz(np.array([[0.0, 1.0], [-2.0, -3.0]]))
        assert not is_hurwitz(np.array([[0.0, 1.0], [2.0, -3.0]]))


class TestCharacteristicPolynomial:
    def test_companion_matrix(self):
        # companion of s^3 + 6 s^2 + 11 s + 6
        A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]])
        assert_allclose(characteristic_polynomial(A).coef, [6.0, 11.0, 6.0, 1.0])

    def test_scalar(self):
        assert_allclose(characteristic_polynomial([[2.5]]).coef, [-2.5, 1.0])

    def test_chain_closed_loop(self):
        gamma, _ = gamma_model(1.0)
        K = np.array([[256.0, 256.0, 96.0, 16.0]])
        A_cl = gamma - np.array([[0.0], [0.0], [0.0], [1.0]]) @ K
        assert_allclose(characteristic_polynomial(A_cl).coef, [256.0, 256.0, 96.0, 16.0, 1.0], atol=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_matches_reference_coefficients(self, n, seed):
        A = np.random.default_rng(seed).normal(size=(n, n))
        expected = np.real(np.poly(A))[::-1]
        assert_allclose(characteristic_polynomial(A).coef, expected, rtol=1e-7, atol=1e-8)

    def test_non_square(self):
        with pytest.raises(DimensionError):
            characteristic_polynomial(np.ones((2, 3)))


class TestPolePlacement:
    def test_repeated_minus_two(self):
        assert_allclose(pole_place_chain([-2.0] * 4), [16.0, 32.0, 24.0, 8.0])

    def test_chain_polynomial_roots(self):
        poles = [-1.0, -2.0, -3.0 + 1.0j, -3.0 - 1.0j]
        K = pole_place_chain(poles)
        roots = np.sort_complex(chain_polynomial(K).roots())
        assert_allclose(roots, np.sort_complex(poles), atol=1e-9)

    def test_unstable_pole_rejected(self):
        with pytest.raises(SynthesisError, match="negative real parts"):
            pole_place_chain([1.0, -1.0, -1.0, -1.0])

    def test_missing_conjugate(self):
        with pytest.raises(SynthesisError, match="conjugate"):
            pole_place_chain([-1.0 + 1.0j, -1.0, -1.0, -1.0])

    def test_wrong_count(self):
        with pytest.raises(SynthesisError):
            pole_place_chain([-1.0, -1.0])

    def test_ackermann(self):
        A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, -2.0, 0.5]])
        B = np.array([[0.0], [0.0], [1.0]])
        poles = [-1.0, -2.0, -4.0]
        K = place_poles_siso(A, B, poles)
        assert_allclose(np.sort(np.linalg.eigvals(A - B @ K).real), [-4.0, -2.0, -1.0], atol=1e-9)


class TestCare:
    def test_scalar_integrator(self):
        P, K = solve_care([[0.0]], [[1.0]], [[1.0]], [[1.0]])
        assert P[0, 0] == pytest.approx(1.0)
        assert K[0, 0] == pytest.approx(1.0)

    def test_scalar_stable(self):
        P, K = solve_care([[-1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert P[0, 0] == pytest.approx(math.sqrt(2) - 1)
        assert K[0, 0] == pytest.approx(math.sqrt(2) - 1)

    def test_double_integrator(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        B = np.array([[0.0], [1.0]])
        P, K = solve_care(A, B, np.eye(2), np.eye(1))
        assert_allclose(K, [[1.0, math.sqrt(3)]], rtol=1e-10)
        assert care_residual(A, B, np.eye(2), np.eye(1), P) <= 1e-8 * (1 + np.linalg.norm(P))

    def test_chain_matches_scipy(self):
        gamma, _ = gamma_model(1.0)
        b = np.array([[0.0], [0.0], [0.0], [1.0]])
        Q = np.diag([1.0, 0.1, 0.01, 0.001])
        R = np.eye(1)
        sol = newton_kleinman(gamma, b, Q, R)
        assert_allclose(sol.P, solve_continuous_are(gamma, b, Q, R), rtol=1e-8, atol=1e-10)
        assert sol.residual <= 1e-8 * (1 + np.linalg.norm(sol.P))
        assert is_hurwitz(gamma - b @ sol.K)

    def test_random_systems(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(1, 3))
            A = rng.normal(size=(n, n))
            B = rng.normal(size=(n, m))
            if controllability_rank(A, B) < n:
                continue
            P, K = solve_care(A, B, np.eye(n), np.eye(m))
            assert care_residual(A, B, np.eye(n), np.eye(m), P) <= 1e-8 * (1 + np.linalg.norm(P))
            assert is_hurwitz(A - B @ K)

    def test_unstabilizable(self):
        # unstable mode +1 that the input cannot reach
        A = np.diag([1.0, -1.0])
        B = np.array([[0.0], [1.0]])
        with pytest.raises(SynthesisError):
            solve_care(A, B, np.eye(2), np.eye(1))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            newton_kleinman(np.eye(2), np.ones((2, 1)), np.eye(3), np.eye(1))


class TestRk4:
    def test_exponential_order(self):
        def f(_t, x):
            return -x

        def run(h):
            x = np.array([1.0])
            for k in range(int(round(1.0 / h))):
                x = rk4_step(f, k * h, x, h)
            return abs(x[0] - math.exp(-1.0))

        order = math.log2(run(0.1) / run(0.05))
        assert order >= 3.7

    def test_nonfinite_derivative(self):
        with pytest.raises(IntegrationError):
            rk4_step(lambda _t, x: x * np.inf, 0.0, np.array([1.0]), 0.1)

    def test_nonpositive_step(self):
        with pytest.raises(ValueError):
            rk4_step(lambda _t, x: x, 0.0, np.array([1.0]), 0.0)
