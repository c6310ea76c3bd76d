import numpy as np
import pytest

from turbrestore.rpca import Decomposition, rpca_ealm, shrink, svt


def jacobi_svd(matrix, sweeps=60, tol=1e-14):
    """One-sided Jacobi SVD: rotate column pairs of A until orthogonal.

    Returns (u, sigma, vt) with A = u @ diag(sigma) @ vt. Independent of
    numpy.linalg.svd, used as an oracle for singular value thresholding.
    """
    a = np.array(matrix, dtype=np.float64)
    m, n = a.shape
    v = np.eye(n)
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = a[:, p] @ a[:, p]
                aqq = a[:, q] @ a[:, q]
                apq = a[:, p] @ a[:, q]
                off = max(off, abs(apq))
                if abs(apq) <= tol * np.sqrt(app * aqq) or apq == 0.0:
                    continue
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                rot = np.array([[c, s], [-s, c]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                v[:, [p, q]] = v[:, [p, q]] @ rot
        if off < tol:
            break
    sigma = np.linalg.norm(a, axis=0)
    order = np.argsort(-sigma)
    sigma = sigma[order]
    u = np.zeros((m, n))
    nonzero = sigma > 1e-300
    u[:, nonzero] = a[:, order][:, nonzero] / sigma[nonzero]
    return u, sigma, v[:, order].T


class TestShrink:
    def test_definition(self):
        assert shrink(np.array(5.0), 2.0) == 3.0
        assert shrink(np.array(-5.0), 2.0) == -3.0

    def test_dead_zone(self):
        assert shrink(np.array(1.0), 2.0) == 0.0

    def test_kappa_zero_is_identity(self):
        x = np.random.default_rng(0).standard_normal((4, 5))
        np.testing.assert_array_equal(shrink(x, 0.0), x)

    def test_non_expansive(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            x, y = rng.standard_normal((2, 6, 6))
            kappa = rng.random()
            assert np.linalg.norm(shrink(x, kappa) - shrink(y, kappa)) <= (
                np.linalg.norm(x - y) + 1e-12
            )

    def test_negative_kappa_rejected(self):
        with pytest.raises(ValueError):
            shrink(np.zeros(2), -1.0)


class TestSvt:
    def test_threshold_zero_reproduces_input(self):
        x = np.random.default_rng(2).standard_normal((8, 5))
        assert np.linalg.norm(svt(x, 0.0) - x) <= 1e-10

    def test_diagonal_case(self):
        np.testing.assert_allclose(
            svt(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]), atol=1e-12
        )

    def test_matches_jacobi_oracle(self):
        x = np.random.default_rng(3).standard_normal((20, 12))
        threshold = 0.8
        u, sigma, vt = jacobi_svd(x)
        np.testing.assert_allclose(u @ np.diag(sigma) @ vt, x, atol=1e-10)
        expected = (u * np.maximum(sigma - threshold, 0.0)) @ vt
        np.testing.assert_allclose(svt(x, threshold), expected, atol=1e-8)

    def test_all_singular_values_removed(self):
        x = 0.1 * np.eye(3)
        np.testing.assert_array_equal(svt(x, 5.0), np.zeros((3, 3)))


class TestRpca:
    def test_zero_matrix(self):
        out = rpca_ealm(np.zeros((6, 4)))
        assert isinstance(out, Decomposition)
        assert out.converged and out.iterations == 1
        np.testing.assert_array_equal(out.L, np.zeros((6, 4)))
        np.testing.assert_array_equal(out.S, np.zeros((6, 4)))

    def test_rank_one_recovery(self):
        rng = np.random.default_rng(4)
        m = np.outer(rng.random(30), rng.random(10))
        out = rpca_ealm(m)
        assert out.converged
        rel = np.linalg.norm(out.L - m) / np.linalg.norm(m)
        assert rel <= 1e-6
        assert np.abs(out.S).max() <= 1e-6

    def test_planted_rank2_plus_sparse(self):
        rng = np.random.default_rng(5)
        l0 = rng.standard_normal((64, 2)) @ rng.standard_normal((2, 32))
        s0 = np.zeros((64, 32))
        idx = rng.random((64, 32)) < 0.05
        s0[idx] = rng.choice([-1.0, 1.0], size=idx.sum())
        out = rpca_ealm(l0 + s0)
        assert out.converged
        assert np.linalg.norm(out.L - l0) / np.linalg.norm(l0) <= 1e-3

    def test_feasibility_residual(self):
        rng = np.random.default_rng(6)
        m = rng.random((20, 10))
        out = rpca_ealm(m)
        gap = np.linalg.norm(m - out.L - out.S) / np.linalg.norm(m)
        assert gap <= 1e-7
        assert out.residual <= 1e-7

    def test_objective_beats_trivial_split(self):
        rng = np.random.default_rng(7)
        l0 = np.outer(rng.random(16), rng.random(12))
        s0 = np.zeros((16, 12))
        s0[rng.random((16, 12)) < 0.1] = 0.5
        m = l0 + s0
        beta = 1.0 / np.sqrt(16)
        out = rpca_ealm(m, beta=beta)

        def objective(l_mat, s_mat):
            return np.linalg.norm(l_mat, "nuc") + beta * np.abs(s_mat).sum()

        assert objective(out.L, out.S) <= objective(m, np.zeros_like(m)) + 1e-6

    def test_non_finite_rejected(self):
        bad = np.zeros((3, 3))
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            rpca_ealm(bad)
