import numpy as np
import pytest

from cvlasso.crossval import (
    GridSpec,
    SplitAssignment,
    combine_mu,
    cv_lasso,
    default_grid,
    estimate_sigma2,
    holdout_sse,
    random_split,
    select_k,
    select_khat,
)
from cvlasso.solver import ConstrainedFit, SolverConfig, fit_path


def _fit(beta, k=0.0):
    beta = np.asarray(beta, dtype=np.float64)
    return ConstrainedFit(k=k, beta=beta, residual_ss=0.0, iterations=0, converged=True)


class TestSplit:
    def test_empty(self):
        s = random_split(0, 3)
        assert s.n == 0 and s.in_i.size == 0 and s.in_ic.size == 0

    def test_golden_pattern(self):
        # frozen output of numpy.PCG64(42): random(8) < 0.5
        s = random_split(8, 42)
        assert s.membership.tobytes().hex() == "0001000001000000"
        assert s.seed == 42 and s.generator == "numpy.PCG64"

    def test_balanced(self):
        # 4 sigma window for Binomial(10^4, 1/2): 4 * 0.5 / 100 = 0.02
        s = random_split(10_000, 2016)
        assert abs(s.membership.mean() - 0.5) <= 0.02

    def test_reproducible(self):
        assert np.array_equal(random_split(100, 5).membership, random_split(100, 5).membership)

    def test_negative(self):
        with pytest.raises(ValueError):
            random_split(-1, 0)


class TestDefaultGrid:
    def test_empty_half(self):
        split = SplitAssignment(membership=np.ones(4, dtype=bool))
        x = np.arange(8.0).reshape(4, 2)
        g = default_grid(x, np.ones(4), split, 0.1)
        assert g.n1 == 0 and g.n2 > 0

    def test_zero_response(self):
        split = SplitAssignment(membership=np.array([True, False, False, True]))
        y = np.array([1.0, 0.0, 0.0, 2.0])
        g = default_grid(np.ones((4, 1)), y, split, 0.1)
        assert g.n1 == 0

    def test_hand_value(self):
        # I^c rows: x = (1, 1), y = (2.25, 2.25); ridge = 4.5 / (2 + 1) = 1.5
        # ceil(2 * 1.5 / 0.1) = 30 even though 3.0 / 0.1 rounds to 30.000000000000004
        split = SplitAssignment(membership=np.array([False, False, True]))
        x = np.array([[1.0], [1.0], [5.0]])
        y = np.array([2.25, 2.25, -7.0])
        assert default_grid(x, y, split, 0.1).n1 == 30

    def test_wide_half(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal((6, 20)), rng.standard_normal(6)
        split = SplitAssignment(membership=np.zeros(6, dtype=bool))
        beta = np.linalg.solve(x.T @ x + np.eye(20), x.T @ y)
        expected = int(np.ceil(2 * np.abs(beta).sum() / 0.05))
        assert default_grid(x, y, split, 0.05).n1 == expected

    def test_bad_delta(self):
        split = SplitAssignment(membership=np.ones(2, dtype=bool))
        with pytest.raises(ValueError):
            default_grid(np.ones((2, 1)), np.ones(2), split, 0.0)
        with pytest.raises(ValueError):
            GridSpec(delta=-1.0, n1=1, n2=1)

    def test_measurability(self):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal((30, 8)), rng.standard_normal(30)
        split = random_split(30, 1)
        base = default_grid(x, y, split, 0.05)
        x2, y2 = x.copy(), y.copy()
        x2[split.in_i] += 5.0
        y2[split.in_i] *= -3.0
        assert default_grid(x2, y2, split, 0.05).n1 == base.n1
        x3, y3 = x.copy(), y.copy()
        y3[split.in_ic] += 10.0
        assert default_grid(x3, y3, split, 0.05).n2 == base.n2


class TestSelectK:
    def test_single_point(self):
        path = fit_path(np.eye(2), [1.0, 1.0], [0.0])
        assert select_k(path, np.eye(2), [5.0, 5.0]) == 0.0

    def test_tie_goes_low(self):
        # holdout row is orthogonal to the only active coordinate: equal SSE
        path = fit_path(np.eye(2), [3.0, 0.0], [0.0, 1.0, 2.0])
        assert select_k(path, np.array([[0.0, 1.0]]), [1.0]) == 0.0

    def test_hand_instance(self):
        # training: identity, y = (3, 3); K=1 fit projects to (0.5, 0.5)
        # holdout y = (1, 1): SSE 2.0 at K=0, 0.5 at K=1
        path = fit_path(np.eye(2), [3.0, 3.0], [0.0, 1.0])
        sse = holdout_sse(path, np.eye(2), [1.0, 1.0])
        np.testing.assert_allclose(sse, [2.0, 0.5], atol=1e-12)
        assert select_k(path, np.eye(2), [1.0, 1.0]) == 1.0

    def test_empty_holdout(self):
        path = fit_path(np.eye(2), [3.0, 3.0], [0.0, 1.0])
        assert select_k(path, np.zeros((0, 2)), np.zeros(0)) == 0.0


class TestCombine:
    def test_zero_fits(self):
        split = random_split(5, 0)
        mu = combine_mu(split, _fit(np.zeros(2)), _fit(np.zeros(2)), np.ones((5, 2)))
        assert np.array_equal(mu, np.zeros(5))

    def test_definition(self):
        split = SplitAssignment(membership=np.array([True, False]))
        x = np.array([[0.7, 0.0], [0.0, -0.3]])
        mu = combine_mu(split, _fit([1.0, 5.0]), _fit([9.0, 1.0]), x)
        np.testing.assert_allclose(mu, [0.7, -0.3])

    def test_pipeline_recomputation(self):
        rng = np.random.default_rng(20)
        x, y = rng.standard_normal((20, 5)), rng.standard_normal(20)
        est = cv_lasso(x, y, delta=0.1, seed=4)
        split, g = est.split, est.grid
        i, ic = split.in_i, split.in_ic
        p2 = fit_path(x[ic], y[ic], g.grid1)
        p1 = fit_path(x[i], y[i], g.grid2)
        b2 = p2.fits[list(g.grid1).index(est.k_hat_1)].beta
        b1 = p1.fits[list(g.grid2).index(est.k_hat_2)].beta
        expected = np.where(split.membership, x @ b2, x @ b1)
        assert np.array_equal(est.mu_prime, expected)


class TestSelectKhat:
    def test_zero_mu(self):
        k, beta, _ = select_khat(np.eye(2), [3.0, 1.0], np.zeros(2), [0.0, 1.0, 2.0])
        assert k == 0.0 and np.array_equal(beta, np.zeros(2))

    def test_identity_instance(self):
        # fits: (0,0), (1,0), (2,0); distances to mu' = (1,0): 1, 0, 1
        k, beta, path = select_khat(np.eye(2), [3.0, 1.0], np.array([1.0, 0.0]), [0.0, 1.0, 2.0])
        dist = [np.linalg.norm(np.array([1.0, 0.0]) - f.beta) for f in path.fits]
        np.testing.assert_allclose(dist, [1.0, 0.0, 1.0], atol=1e-9)
        assert k == 1.0
        np.testing.assert_allclose(beta, [1.0, 0.0], atol=1e-12)

    def test_brute_force(self):
        rng = np.random.default_rng(50)
        x, y = rng.standard_normal((50, 20)), rng.standard_normal(50)
        mu = x @ (0.1 * rng.standard_normal(20))
        grid = 0.1 * np.arange(30)
        k, beta, _ = select_khat(x, y, mu, grid)
        crit = [np.linalg.norm(mu - x @ fit.beta) for fit in fit_path(x, y, grid).fits]
        assert k == grid[int(np.argmin(crit))]

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            select_khat(np.eye(2), [1.0, 1.0], np.zeros(2), [])


class TestSigma2:
    def test_exact_fit(self):
        x = np.eye(3)
        assert estimate_sigma2([1.0, 2.0, 3.0], x, [1.0, 2.0, 3.0]) == 0.0

    def test_zero_beta(self):
        y = np.array([1.0, 2.0, 2.0])
        assert estimate_sigma2(y, np.ones((3, 1)), [0.0]) == pytest.approx(9.0 / 3)

    def test_hand(self):
        # residuals (0.5, -0.5): (0.25 + 0.25) / 2
        assert estimate_sigma2([1.0, -1.0], np.eye(2), [0.5, -0.5]) == pytest.approx(0.25, abs=1e-15)

    def test_empty(self):
        with pytest.raises(ValueError):
            estimate_sigma2(np.zeros(0), np.zeros((0, 2)), np.zeros(2))


class TestCvLasso:
    def test_empty_design(self):
        est = cv_lasso(np.zeros((0, 3)), np.zeros(0), seed=1)
        assert np.array_equal(est.beta_cv, np.zeros(3)) and est.k_hat == 0.0

    def test_noiseless_recovery(self, backend):
        rng = np.random.default_rng(100)
        x = rng.standard_normal((100, 10))
        beta = np.zeros(10)
        beta[:4] = [0.4, -0.3, 0.2, 0.1]
        est = cv_lasso(x, x @ beta, delta=0.01, seed=3, cfg=SolverConfig(backend=backend))
        mspe = np.sum((x @ (beta - est.beta_cv)) ** 2) / 100
        assert mspe < 1e-4

    def test_deterministic(self, backend):
        rng = np.random.default_rng(7)
        x, y = rng.standard_normal((40, 15)), rng.standard_normal(40)
        cfg = SolverConfig(backend=backend)
        a = cv_lasso(x, y, seed=9, cfg=cfg)
        b = cv_lasso(x, y, seed=9, cfg=cfg)
        assert a.beta_cv.tobytes() == b.beta_cv.tobytes()
        assert a.mu_prime.tobytes() == b.mu_prime.tobytes()
        assert (a.k_hat, a.k_hat_1, a.k_hat_2, a.sigma2_hat) == (b.k_hat, b.k_hat_1, b.k_hat_2, b.sigma2_hat)

    def test_override_zero_forces_zero(self):
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((20, 4)), rng.standard_normal(20)
        est = cv_lasso(x, y, grid_override=(0, 0), seed=2)
        assert np.array_equal(est.beta_cv, np.zeros(4))
        assert est.sigma2_hat == pytest.approx(y @ y / 20)

    def test_partial_override(self):
        rng = np.random.default_rng(1)
        x, y = rng.standard_normal((20, 4)), rng.standard_normal(20)
        base = cv_lasso(x, y, seed=2)
        est = cv_lasso(x, y, grid_override=(3, None), seed=2)
        assert est.grid.n1 == 3 and est.grid.n2 == base.grid.n2

    @pytest.mark.parametrize("seed", range(8))
    def test_defining_inequalities(self, seed):
        rng = np.random.default_rng(seed)
        n, p = 30, 12
        x = rng.standard_normal((n, p))
        y = x[:, :3] @ np.array([1.0, -1.0, 0.5]) + rng.standard_normal(n)
        est = cv_lasso(x, y, delta=0.1, seed=seed)
        g, split = est.grid, est.split
        i, ic = split.in_i, split.in_ic
        assert est.k_hat_1 in g.grid1 and est.k_hat_2 in g.grid2 and est.k_hat in g.grid_full
        sse1 = holdout_sse(fit_path(x[ic], y[ic], g.grid1), x[i], y[i])
        assert sse1[list(g.grid1).index(est.k_hat_1)] <= sse1.min()
        sse2 = holdout_sse(fit_path(x[i], y[i], g.grid2), x[ic], y[ic])
        assert sse2[list(g.grid2).index(est.k_hat_2)] <= sse2.min()
        crit = [np.linalg.norm(est.mu_prime - x @ f.beta) for f in fit_path(x, y, g.grid_full).fits]
        assert np.linalg.norm(est.mu_prime - x @ est.beta_cv) <= min(crit)
        assert np.abs(est.beta_cv).sum() <= est.k_hat * (1 + 1e-9)
        r = y - x @ est.beta_cv
        assert est.sigma2_hat == float(r @ r) / n
        assert est.sigma2_hat >= 0
        if np.linalg.norm(r) <= np.linalg.norm(y):
            assert est.sigma2_hat <= y @ y / n + 1e-9
