import numpy as np
import numpy.testing as npt
import pytest

from phstab import algebra
from phstab.model import preset_string, preset_timoshenko


class TestEigenvalues:
    def test_real_symmetric(self):
        npt.assert_allclose(algebra.hermitian_eigenvalues([[2.0, 1.0], [1.0, 2.0]]), [1.0, 3.0])

    def test_complex_hermitian(self):
        m = np.array([[2.0, 1j], [-1j, 2.0]])
        npt.assert_allclose(algebra.hermitian_eigenvalues(m), [1.0, 3.0], atol=1e-12)

    def test_matches_lapack(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        m = a + a.conj().T
        npt.assert_allclose(
            algebra.hermitian_eigenvalues(m), np.linalg.eigvalsh(m), atol=1e-10
        )

    def test_zero_matrix(self):
        npt.assert_array_equal(algebra.hermitian_eigenvalues(np.zeros((3, 3))), np.zeros(3))

    def test_not_hermitian(self):
        with pytest.raises(ValueError):
            algebra.hermitian_eigenvalues([[1.0, 2.0], [0.0, 1.0]])

    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            algebra.as_matrix(np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            algebra.as_matrix([[np.nan]])


class TestClassification:
    def test_zero_is_both_semidefinite(self):
        verdict = algebra.psd_classify(np.zeros((2, 2)))
        assert verdict.classification == algebra.POSITIVE_SEMIDEFINITE
        assert verdict.is_psd
        assert verdict.is_nsd

    @pytest.mark.parametrize(
        "matrix, expected",
        [
            (np.eye(2), algebra.POSITIVE_DEFINITE),
            (np.diag([1.0, 0.0]), algebra.POSITIVE_SEMIDEFINITE),
            (np.diag([1.0, -1.0]), algebra.INDEFINITE),
            (np.diag([-1.0, 0.0]), algebra.NEGATIVE_SEMIDEFINITE),
            (-np.eye(2), algebra.NEGATIVE_DEFINITE),
        ],
    )
    def test_classes(self, matrix, expected):
        assert algebra.psd_classify(matrix).classification == expected

    def test_tolerance_must_be_positive(self):
        with pytest.raises(ValueError):
            algebra.psd_classify(np.eye(2), tol=0.0)

    def test_rank(self):
        assert algebra.rank([[1.0, 2.0], [2.0, 4.0]]) == 1
        assert algebra.rank(np.eye(3)) == 3
        assert algebra.rank(np.zeros((2, 2))) == 0

    def test_spectral_norm(self):
        assert algebra.spectral_norm(np.diag([3.0, -4.0])) == pytest.approx(4.0)
        assert algebra.spectral_norm([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0)


class TestBoundaryPort:
    def test_block_swap(self):
        sigma = algebra.block_swap(2)
        npt.assert_array_equal(sigma @ sigma, np.eye(4))
        assert sigma[0, 2] == 1.0 and sigma[0, 0] == 0.0

    def test_block_inverse(self):
        p1 = np.array([[0.0, 1.0], [1.0, 0.0]])
        inverse = algebra.boundary_block_inverse(p1)
        block = np.block([[p1, -p1], [np.eye(2), np.eye(2)]])
        npt.assert_allclose(block @ inverse, np.eye(4), atol=1e-14)

    def test_singular_p1(self):
        with pytest.raises(np.linalg.LinAlgError):
            algebra.boundary_block_inverse(np.diag([1.0, 0.0]))

    def test_string_wb(self):
        system = preset_string(k=1.0)
        expected = 0.5 * np.array([[1.0, 1.0, 1.0, 1.0], [0.0, -1.0, 1.0, 0.0]])
        npt.assert_allclose(algebra.compute_WB(system.W_tilde_B, system.P1), expected, atol=1e-12)

    @pytest.mark.parametrize("k", [0.25, 1.0, 3.0])
    def test_string_dissipation_form(self, k):
        system = preset_string(k=k)
        product = algebra.wb_sigma_wbstar(system.W_B)
        npt.assert_allclose(product, np.diag([k, 0.0]), atol=1e-12)
        verdict = algebra.psd_classify(product)
        assert verdict.is_psd
        assert algebra.rank(product) == 1

    def test_timoshenko_dissipation_form(self):
        system = preset_timoshenko(alpha1=2.0, alpha2=0.5)
        product = algebra.wb_sigma_wbstar(system.W_B)
        npt.assert_allclose(product - np.diag(np.diag(product)), 0.0, atol=1e-12)
        diagonal = np.real(np.diag(product))
        npt.assert_allclose(diagonal[:2], 0.0, atol=1e-12)
        assert diagonal[2] > 0.0 and diagonal[3] > 0.0
        assert diagonal[2] / diagonal[3] == pytest.approx(4.0)

    def test_column_count_check(self):
        with pytest.raises(ValueError):
            algebra.compute_WB(np.ones((2, 3)), np.eye(2))

    def test_row_count_check(self):
        with pytest.raises(ValueError) as error:
            algebra.compute_WB(np.ones((3, 4)), np.eye(2))
        assert "(2, 4)" in str(error.value)
        with pytest.raises(ValueError):
            algebra.wb_sigma_wbstar(np.ones((3, 4)))


def random_p1(rng, n):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    values = rng.uniform(0.5, 2.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    return q @ np.diag(values) @ q.conj().T


class TestBoundaryProperties:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_wb_times_block_recovers_wtilde(self, seed, n):
        rng = np.random.default_rng(seed)
        p1 = random_p1(rng, n)
        wtilde = rng.normal(size=(n, 2 * n))
        block = np.block([[p1, -p1], [np.eye(n), np.eye(n)]])
        npt.assert_allclose(algebra.compute_WB(wtilde, p1) @ block, wtilde, atol=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_rank_is_preserved(self, seed):
        rng = np.random.default_rng(seed)
        p1 = random_p1(rng, 3)
        wtilde = rng.normal(size=(3, 6))
        wtilde[2] = 2.0 * wtilde[0] - wtilde[1]
        wb = algebra.compute_WB(wtilde, p1)
        assert algebra.rank(wtilde) == algebra.rank(wb) == 2

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 7.0, 1e3])
    @pytest.mark.parametrize(
        "matrix",
        [np.eye(3), np.diag([1.0, 0.0, 2.0]), np.diag([1.0, -1.0, 0.0]), -np.eye(3)],
    )
    def test_verdict_is_invariant_under_positive_scaling(self, matrix, scale):
        expected = algebra.psd_classify(matrix).classification
        assert algebra.psd_classify(scale * matrix).classification == expected
