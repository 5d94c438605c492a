import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import complex_square_matrices, hermitian_matrices
from qbattery.errors import ConvergenceError, DimensionError, DomainError, ValidationError
from qbattery.linalg import (HermitianMatrix, abs_sq, as_square_matrix, commutator,
                             hermitian_eig, matrix_function, max_abs, reconstruct)
from qbattery.tolerances import DEFAULT_TOLERANCES

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)   # |1><0|
H2 = np.diag([0.0, 1.0]).astype(complex)


class TestCommutator:
    def test_number_operator_raises(self):
        # [diag(0,1), |1><0|] = |1><0|, worked out entrywise
        assert np.array_equal(commutator(H2, SIGMA_PLUS), SIGMA_PLUS)

    def test_self_commutation_is_zero(self, rng):
        a = oracles.random_ginibre(rng, 4)
        assert max_abs(commutator(a, a)) == 0.0

    def test_diagonal_weight_identity(self, rng):
        # [diag(w), L] entry (i, k) is (w_i - w_k) L_ik
        w = rng.uniform(-2.0, 2.0, size=4)
        l = oracles.random_ginibre(rng, 4)
        got = commutator(np.diag(w).astype(complex), l)
        for i in range(4):
            for k in range(4):
                assert got[i, k] == pytest.approx((w[i] - w[k]) * l[i, k], abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            commutator(np.eye(2), np.eye(3))

    @given(complex_square_matrices(2, 4), complex_square_matrices(2, 4))
    def test_antisymmetry(self, a, b):
        if a.shape != b.shape:
            return
        assert max_abs(commutator(a, b) + commutator(b, a)) <= 1e-12


class TestAbsSq:
    def test_raising_operator_projects_on_excited(self):
        got = abs_sq(SIGMA_PLUS)
        assert np.array_equal(got.matrix, np.diag([0.0, 1.0]).astype(complex))

    def test_zero(self):
        assert max_abs(abs_sq(np.zeros((3, 3))).matrix) == 0.0

    def test_against_loop_oracle(self, rng):
        a = oracles.random_ginibre(rng, 3)
        got = abs_sq(a).matrix
        want = oracles.abs_sq_loops(a)
        assert max_abs(got - want) <= 1e-12

    @given(complex_square_matrices(2, 5))
    def test_psd_within_slack(self, a):
        h = abs_sq(a)
        floor = -1e-10 * max(1.0, max_abs(h.matrix))
        assert np.linalg.eigvalsh(h.matrix).min() >= floor


class TestHermitianMatrix:
    def test_symmetrizes_and_records_defect(self):
        m = np.array([[1.0, 0.5 + 1e-14j], [0.5, 2.0]], dtype=complex)
        h = HermitianMatrix(m)
        assert max_abs(h.matrix - oracles.dag(h.matrix)) == 0.0
        assert 0.0 < h.defect < 1e-13

    def test_rejects_gross_asymmetry(self):
        with pytest.raises(ValidationError):
            HermitianMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_defect_tolerance_scales_with_magnitude(self):
        # 1e-10 absolute asymmetry is fine on a matrix of norm ~1e3
        m = np.array([[1e3, 1e3 + 1e-10j], [1e3, 1e3]], dtype=complex)
        h = HermitianMatrix(m)
        assert h.defect <= 1e-9

    def test_stored_array_is_frozen(self):
        h = HermitianMatrix(H2)
        with pytest.raises(ValueError):
            h.matrix[0, 0] = 5.0

    def test_non_square(self):
        with pytest.raises(DimensionError):
            HermitianMatrix(np.zeros((2, 3)))

    def test_non_finite(self):
        with pytest.raises(ValidationError):
            as_square_matrix(np.array([[np.nan, 0.0], [0.0, 0.0]]))


class TestHermitianEig:
    def test_diagonal_gets_sorted_with_permutation_vectors(self):
        spec = hermitian_eig(HermitianMatrix(np.diag([5.0, 2.0])))
        assert np.array_equal(spec.eigenvalues, np.array([2.0, 5.0]))
        assert np.array_equal(spec.eigenvectors,
                              np.array([[0, 1], [1, 0]], dtype=complex))

    def test_identity_keeps_original_order(self):
        spec = hermitian_eig(HermitianMatrix(np.eye(3)))
        assert np.array_equal(spec.eigenvectors, np.eye(3, dtype=complex))

    def test_sigma_x_by_hand(self):
        spec = hermitian_eig(HermitianMatrix(SIGMA_X))
        assert spec.eigenvalues == pytest.approx([-1.0, 1.0], abs=1e-14)
        r = 1.0 / math.sqrt(2.0)
        assert max_abs(spec.eigenvectors[:, 0] - np.array([r, -r])) <= 1e-14
        assert max_abs(spec.eigenvectors[:, 1] - np.array([r, r])) <= 1e-14

    def test_sigma_y_phase_convention(self):
        # first component of each eigenvector is made real positive
        spec = hermitian_eig(HermitianMatrix(SIGMA_Y))
        r = 1.0 / math.sqrt(2.0)
        assert max_abs(spec.eigenvectors[:, 0] - np.array([r, -1j * r])) <= 1e-14
        assert max_abs(spec.eigenvectors[:, 1] - np.array([r, 1j * r])) <= 1e-14

    def test_reconstruction_unitarity_8x8(self, rng):
        m = oracles.random_hermitian(rng, 8, scale=3.0)
        h = HermitianMatrix(m)
        spec = hermitian_eig(h)
        scale = max(1.0, max_abs(h.matrix))
        assert max_abs(reconstruct(spec) - h.matrix) <= 1e-10 * scale
        u = spec.eigenvectors
        assert max_abs(oracles.dag(u) @ u - np.eye(8)) <= 1e-10

    def test_matches_numpy_up_to_dim_12(self, rng):
        for d in range(2, 13):
            m = oracles.random_hermitian(rng, d, scale=10.0 / 3.0)
            spec = hermitian_eig(HermitianMatrix(m))
            want = np.linalg.eigvalsh(m)
            scale = max(1.0, max_abs(m))
            assert max_abs(spec.eigenvalues - want) <= 1e-10 * scale

    def test_deterministic(self, rng):
        m = oracles.random_hermitian(rng, 6)
        a = hermitian_eig(HermitianMatrix(m))
        b = hermitian_eig(HermitianMatrix(m))
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_convergence_budget_exhaustion(self):
        tol = DEFAULT_TOLERANCES.replace(jacobi_max_sweeps=0)
        with pytest.raises(ConvergenceError) as exc:
            hermitian_eig(HermitianMatrix(SIGMA_X), tol=tol)
        assert exc.value.off_diagonal_norm > 0.0

    @given(hermitian_matrices(2, 5))
    @settings(max_examples=40)
    def test_spectrum_invariants_random(self, m):
        h = HermitianMatrix(m)
        spec = hermitian_eig(h)
        assert np.all(np.diff(spec.eigenvalues) >= 0.0)
        d = h.dim
        u = spec.eigenvectors
        scale = max(1.0, max_abs(h.matrix))
        assert max_abs(oracles.dag(u) @ u - np.eye(d)) <= 1e-10
        assert max_abs(reconstruct(spec) - h.matrix) <= 1e-10 * scale


class TestMatrixFunction:
    def test_identity_function(self, rng):
        m = oracles.random_hermitian(rng, 4)
        h = HermitianMatrix(m)
        got = matrix_function(h, lambda x: x)
        assert max_abs(got.matrix - h.matrix) <= 1e-10 * max(1.0, max_abs(m))

    def test_scalar_log(self):
        h = HermitianMatrix(np.diag([0.5, 0.5]))
        got = matrix_function(h, math.log)
        assert max_abs(got.matrix - np.diag([-math.log(2)] * 2)) <= 1e-14

    def test_exp_log_roundtrip(self, rng):
        rho = oracles.random_density(rng, 4)
        h = HermitianMatrix(rho)
        back = matrix_function(matrix_function(h, math.log), math.exp)
        assert max_abs(back.matrix - h.matrix) <= 1e-9

    def test_log_of_singular_matrix(self):
        with pytest.raises(DomainError) as exc:
            matrix_function(HermitianMatrix(np.diag([0.0, 1.0])), math.log)
        assert abs(exc.value.eigenvalue) <= 1e-12

    @given(hermitian_matrices(2, 4), st.floats(-2.0, 2.0, allow_nan=False))
    @settings(max_examples=40)
    def test_shift_consistency(self, m, c):
        h = HermitianMatrix(m)
        got = matrix_function(h, lambda x: x + c)
        want = h.matrix + c * np.eye(h.dim)
        assert max_abs(got.matrix - want) <= 1e-10 * max(1.0, max_abs(want))
