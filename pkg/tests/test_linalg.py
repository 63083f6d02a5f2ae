import numpy as np
import pytest

from consensim.errors import (
    ConvergenceError,
    DimensionError,
    NotStabilizableError,
    SpectrumConflictError,
)
from consensim.linalg import (
    care_residual,
    eigenvalues,
    is_hurwitz,
    is_positive_definite,
    kleinman_iterates,
    lambda_max,
    solve_care,
    solve_lyapunov,
    stabilizing_gain_bass,
)

from oracles import random_hurwitz, real_roots_by_bisection

# Second-order integrator benchmark model (x1 = position, x2 = velocity).
A2 = np.array([[0.0, 1.0], [0.0, 0.0]])
B2 = np.array([[0.0], [1.0]])
C2 = np.array([[1.0, 0.0]])
K2 = -np.array([[0.8543, 2.5628]])
S2 = np.array([[0.5853, -0.5853], [-0.5853, 1.7559]])


class TestEigenvalues:
    def test_identity(self):
        assert np.allclose(eigenvalues(np.eye(3)), np.ones(3))

    def test_nilpotent(self):
        assert np.allclose(eigenvalues(A2), np.zeros(2))

    def test_companion_matrix_matches_bisection_roots(self):
        roots = [-3.5, -1.25, 0.5, 2.0, 4.75]
        coeffs = np.array([1.0])
        for r in roots:
            coeffs = np.convolve(coeffs, [1.0, -r])
        companion = np.zeros((5, 5))
        companion[:-1, 1:] = np.eye(4)
        companion[-1, :] = -coeffs[::-1][:-1]
        oracle = real_roots_by_bisection(list(coeffs), lo=-10, hi=10)
        got = eigenvalues(companion)
        assert np.max(np.abs(got.imag)) < 1e-8
        assert np.allclose(sorted(got.real), oracle, atol=1e-8)

    def test_sorted_and_conjugate_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 9))
            m = rng.normal(size=(n, n))
            vals = eigenvalues(m)
            order = np.lexsort((vals.imag, vals.real))
            assert np.array_equal(order, np.arange(n))
            # conjugate-pair symmetry: the multiset is closed under conjugation
            paired = np.sort_complex(vals)
            assert np.allclose(np.sort_complex(paired.conj()), paired, atol=1e-9)

    def test_trace_equals_eigenvalue_sum(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(2, 10))
            m = rng.normal(size=(n, n))
            vals = eigenvalues(m)
            scale = max(1.0, abs(np.trace(m)))
            assert abs(vals.sum().real - np.trace(m)) / scale < 1e-8
            assert abs(vals.sum().imag) / scale < 1e-8

    def test_backward_error(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(2, 8))
            m = rng.normal(size=(n, n))
            vals, vecs = np.linalg.eig(m)
            norm = np.linalg.norm(m, 2)
            for k in range(n):
                assert (
                    np.linalg.norm(m @ vecs[:, k] - vals[k] * vecs[:, k]) / norm < 1e-9
                )

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.ones((2, 3)))

    def test_rejects_oversized(self):
        with pytest.raises(DimensionError):
            eigenvalues(np.eye(65))


class TestIsHurwitz:
    def test_negative_identity(self):
        assert is_hurwitz(-np.eye(2), margin=0.0)

    def test_double_integrator_is_not(self):
        assert not is_hurwitz(A2, margin=0.0)

    def test_benchmark_closed_loop(self):
        assert is_hurwitz(A2 + B2 @ K2, margin=0.0)

    def test_margin(self):
        assert is_hurwitz(-np.eye(2), margin=0.5)
        assert not is_hurwitz(-np.eye(2), margin=1.0)


class TestIsPositiveDefinite:
    def test_identity(self):
        assert is_positive_definite(np.eye(2))

    def test_indefinite(self):
        assert not is_positive_definite(np.diag([1.0, -1.0]))

    def test_benchmark_certificate_matrix(self):
        assert is_positive_definite(S2)

    def test_rejects_asymmetric(self):
        with pytest.raises(DimensionError):
            is_positive_definite(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_tol_is_strict(self):
        assert not is_positive_definite(np.eye(2), tol=1.0)


class TestSolveLyapunov:
    def test_analytic_identity(self):
        x = solve_lyapunov(-np.eye(2), np.eye(2))
        assert np.allclose(x, 0.5 * np.eye(2), atol=1e-12)

    def test_decoupled_scalars(self):
        x = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
        assert np.allclose(x, np.diag([0.5, 0.25]), atol=1e-12)

    def test_random_hurwitz_residual(self):
        rng = np.random.default_rng(3)
        a = random_hurwitz(rng, 4)
        q = np.eye(4)
        x = solve_lyapunov(a, q)
        res = np.linalg.norm(a.T @ x + x @ a + q, "fro")
        scale = np.linalg.norm(a, "fro") * np.linalg.norm(x, "fro") + np.linalg.norm(q, "fro")
        assert res <= 1e-9 * scale

    def test_residual_sweep(self):
        # 500 random Hurwitz systems of dimension <= 6
        rng = np.random.default_rng(5)
        for _ in range(500):
            n = int(rng.integers(1, 7))
            a = random_hurwitz(rng, n)
            q = rng.normal(size=(n, n))
            q = q + q.T
            x = solve_lyapunov(a, q)
            res = np.linalg.norm(a.T @ x + x @ a + q, "fro")
            scale = (
                np.linalg.norm(a, "fro") * np.linalg.norm(x, "fro")
                + np.linalg.norm(q, "fro")
            )
            assert res <= 1e-9 * scale

    def test_spectrum_conflict(self):
        with pytest.raises(SpectrumConflictError):
            solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))

    def test_dimension_cap(self):
        with pytest.raises(DimensionError):
            solve_lyapunov(-np.eye(33), np.eye(33))


class TestStabilizingGainBass:
    def test_scalar(self):
        k0 = stabilizing_gain_bass(np.array([[0.0]]), np.array([[1.0]]))
        assert k0[0, 0] > 0.0
        assert float(0.0 - k0[0, 0]) < 0.0

    def test_benchmark_pair(self):
        k0 = stabilizing_gain_bass(A2, B2)
        assert is_hurwitz(A2 - B2 @ k0)

    def test_stabilizable_uncontrollable_pair(self):
        # unstable mode +1 is controllable, stable mode -1 is not
        a = np.diag([1.0, -1.0])
        b = np.array([[1.0], [0.0]])
        k0 = stabilizing_gain_bass(a, b)
        closed = eigenvalues(a - b @ k0)
        assert np.all(closed.real < 0)
        # the uncontrollable stable mode stays exactly at -1
        assert np.min(np.abs(closed - (-1.0))) < 1e-9

    def test_not_stabilizable(self):
        a = np.diag([1.0, -1.0])
        b = np.array([[0.0], [1.0]])
        with pytest.raises(NotStabilizableError) as err:
            stabilizing_gain_bass(a, b)
        assert "1" in str(err.value)


class TestSolveCare:
    def test_scalar_zero(self):
        s = solve_care(np.array([[0.0]]), np.array([[1.0]]))
        assert abs(s[0, 0] - 1.0) < 1e-10

    def test_scalar_unstable(self):
        s = solve_care(np.array([[1.0]]), np.array([[1.0]]))
        assert abs(s[0, 0] - (1.0 + np.sqrt(2.0))) < 1e-10

    def test_benchmark_observer_form(self):
        pbar = solve_care(A2.T, C2.T)
        assert care_residual(A2.T, C2.T, pbar) <= 1e-8
        s = np.linalg.inv(pbar)
        lmi = A2.T @ s + s @ A2 - 2.0 * C2.T @ C2
        # Riccati identity: A^T S + S A - 2 C^T C = -S^2 - C^T C
        assert np.linalg.norm(lmi - (-s @ s - C2.T @ C2), "fro") < 1e-7
        assert lambda_max(lmi) < 0.0

    def test_kleinman_iterates_stay_stabilizing(self):
        rng = np.random.default_rng(17)
        a = rng.normal(size=(4, 4))
        b = rng.normal(size=(4, 2))
        count = 0
        for x, residual in kleinman_iterates(a, b):
            assert is_hurwitz(a - b @ (b.T @ x))
            count += 1
            if residual <= 1e-8:
                break
        assert count < 100

    def test_solution_symmetric_positive_definite(self):
        rng = np.random.default_rng(19)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            a = rng.normal(size=(n, n))
            b = rng.normal(size=(n, max(1, n // 2)))
            s = solve_care(a, b)
            assert np.max(np.abs(s - s.T)) <= 1e-10 * max(1.0, np.max(np.abs(s)))
            assert np.linalg.eigvalsh(s)[0] > 0.0
            assert care_residual(a, b, s) <= 1e-8

    def test_unattainable_pair_raises(self):
        a = np.diag([2.0, 1.0])
        b = np.zeros((2, 1))
        with pytest.raises((NotStabilizableError, ConvergenceError)):
            solve_care(a, b)
