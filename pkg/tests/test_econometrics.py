import numpy as np
import pytest

from conftest import breakpoint_rescan_oracle, hac_double_sum_oracle
from monephase import econometrics as em
from monephase.errors import CollinearityError, DataError
from monephase.series import MonthIndex, MonthlySeries

START = MonthIndex(1970, 1)


def ms(values, start=START):
    return MonthlySeries(start, values)


class TestOls:
    def test_intercept_only_is_mean(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal(50)
        fit = em.ols(np.ones((50, 1)), y)
        assert fit.coefficients[0] == pytest.approx(y.mean(), abs=1e-12)

    def test_exact_line(self):
        x = np.linspace(0, 1, 30)
        y = 2.0 + 3.0 * x
        fit = em.ols(np.column_stack([np.ones(30), x]), y)
        assert np.allclose(fit.coefficients, [2.0, 3.0], atol=1e-10)

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(42)
        X = np.column_stack([np.ones(200), rng.standard_normal((200, 3))])
        y = rng.standard_normal(200)
        fit = em.ols(X, y)
        oracle = np.linalg.inv(X.T @ X) @ X.T @ y
        assert np.allclose(fit.coefficients, oracle, atol=1e-8)

    def test_residuals_orthogonal_to_regressors(self):
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(120), rng.standard_normal((120, 4))])
        y = rng.standard_normal(120)
        fit = em.ols(X, y)
        assert np.max(np.abs(X.T @ fit.residuals)) < 1e-8 * np.linalg.norm(y)

    def test_collinear_rejected(self):
        x = np.linspace(0, 1, 40)
        X = np.column_stack([np.ones(40), x, 2.0 * x])
        with pytest.raises(CollinearityError):
            em.ols(X, x)

    def test_underdetermined_rejected(self):
        with pytest.raises(DataError, match="more observations"):
            em.ols(np.ones((3, 3)), np.ones(3))


class TestHac:
    def test_lag_zero_equals_white(self):
        rng = np.random.default_rng(1)
        X = np.column_stack([np.ones(150), rng.standard_normal((150, 2))])
        u = rng.standard_normal(150)
        V = em.hac_covariance(X, u, 0)
        xu = X * u[:, None]
        bread = np.linalg.inv(X.T @ X)
        white = bread @ (xu.T @ xu) @ bread
        white = (white + white.T) / 2.0
        assert np.array_equal(V, white)

    def test_matches_double_sum_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            n = int(rng.integers(40, 120))
            k = int(rng.integers(1, 5))
            lag = int(rng.integers(0, 13))
            X = np.column_stack([np.ones(n), rng.standard_normal((n, k))])
            u = rng.standard_normal(n)
            V = em.hac_covariance(X, u, lag)
            oracle = hac_double_sum_oracle(X, u, lag)
            assert np.max(np.abs(V - oracle)) < 1e-10

    def test_iid_close_to_classical(self):
        # homoskedastic iid data: HAC(12) within 15% of textbook OLS SEs
        rng = np.random.default_rng(7)
        n = 2000
        X = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
        y = X @ np.array([1.0, 0.5, -0.25]) + rng.standard_normal(n)
        fit = em.ols(X, y)
        V = em.hac_covariance(X, fit.residuals, 12)
        hac_se = np.sqrt(np.diag(V))
        sigma2 = fit.residuals @ fit.residuals / (n - 3)
        classical = np.sqrt(np.diag(sigma2 * np.linalg.inv(X.T @ X)))
        assert np.all(np.abs(hac_se / classical - 1.0) < 0.15)

    def test_symmetric_nonnegative_diagonal(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = int(rng.integers(30, 80))
            X = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
            u = rng.standard_normal(n)
            V = em.hac_covariance(X, u, int(rng.integers(0, 12)))
            assert np.array_equal(V, V.T)
            assert np.min(np.diag(V)) >= -1e-12

    def test_lag_too_large(self):
        with pytest.raises(DataError, match="below the sample size"):
            em.hac_covariance(np.ones((10, 1)), np.ones(10), 10)


class TestArFit:
    def test_recovers_ar1_coefficient(self):
        rng = np.random.default_rng(5)
        T = 2000
        x = np.zeros(T)
        for t in range(1, T):
            x[t] = 0.5 * x[t - 1] + rng.standard_normal()
        coef, shock = em.ar_fit(ms(x), 1)
        assert coef[1] == pytest.approx(0.5, abs=0.05)
        assert not shock.standardized

    def test_deterministic_recursion_zero_residuals(self):
        x = np.arange(1.0, 101.0)  # x_t = x_{t-1} + 1
        _, shock = em.ar_fit(ms(x), 1)
        resid = shock.values.values
        assert np.nanmax(np.abs(resid)) < 1e-10

    def test_white_noise_ar12(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal(5000)
        coef, shock = em.ar_fit(ms(x), 12)
        assert np.max(np.abs(coef[1:])) < 0.05
        resid = shock.values.values
        assert np.nanvar(resid, ddof=1) == pytest.approx(1.0, abs=0.1)

    def test_residuals_only_on_usable_rows(self):
        rng = np.random.default_rng(30)
        x = rng.standard_normal(100)
        seg = [(START + 10, START + 40), (START + 60, START + 99)]
        _, shock = em.ar_fit(ms(x), 3, seg)
        vals = shock.values.values
        assert np.isnan(vals[:13]).all()  # first 3 rows of segment 1 are lags
        assert not np.isnan(vals[13:41]).any()
        assert np.isnan(vals[41:63]).all()
        assert not np.isnan(vals[63:]).any()

    def test_rows_never_span_gap(self):
        # a huge level jump across the gap never enters any regression row,
        # so the fitted dynamics look like the plain AR(1) of both halves
        rng = np.random.default_rng(31)
        half = np.zeros(50)
        for t in range(1, 50):
            half[t] = 0.5 * half[t - 1] + rng.standard_normal()
        x = np.concatenate([half, 1e6 + half])
        segs = [(START, START + 49), (START + 50, START + 99)]
        coef, shock = em.ar_fit(ms(x), 1, segs)
        assert np.nanmax(np.abs(shock.values.values)) < 10.0
        assert abs(coef[1]) < 1.5

    def test_too_few_rows(self):
        with pytest.raises(DataError, match="too few usable rows"):
            em.ar_fit(ms(np.arange(10.0)), 8)


class TestStandardize:
    def test_two_point(self):
        shock = em.ShockSeries(ms([-1.0, 1.0]), "ar_resid(1)")
        out = em.standardize(shock)
        sd = np.std([-1.0, 1.0], ddof=1)
        assert np.allclose(out.values.values, [-1.0 / sd, 1.0 / sd])
        assert out.standardized

    def test_unit_variance_untouched(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal(500)
        v = v / v.std(ddof=1)
        out = em.standardize(em.ShockSeries(ms(v), "x"))
        assert np.allclose(out.values.values, v, atol=1e-12)

    def test_output_variance_is_one(self):
        rng = np.random.default_rng(1)
        v = 3.0 + 5.0 * rng.standard_normal(200)
        out = em.standardize(em.ShockSeries(ms(v), "x"))
        assert np.var(out.values.values, ddof=1) == pytest.approx(1.0, abs=1e-10)
        # mean is scaled, not removed
        assert out.values.values.mean() != pytest.approx(0.0, abs=1e-3)

    def test_zero_variance_rejected(self):
        with pytest.raises(DataError, match="degenerate"):
            em.standardize(em.ShockSeries(ms([2.0, 2.0, 2.0]), "x"))


class TestLocalProjection:
    def test_planted_spike_exact_within_support(self):
        # y_{t+2} = 0.7 u_t exactly; with L = 2 every horizon 0..2 is spanned
        rng = np.random.default_rng(4)
        T = 400
        u = rng.standard_normal(T)
        y = np.zeros(T)
        y[2:] = 0.7 * u[:-2]
        tbl = em.local_projection(
            ms(y), em.ShockSeries(ms(u), "iid"), H=2, L=2, hac_lag=2
        )
        beta = tbl.beta()
        assert abs(beta[0]) < 1e-8 and abs(beta[1]) < 1e-8
        assert beta[2] == pytest.approx(0.7, abs=1e-8)

    def test_zero_outcome_rejected(self):
        rng = np.random.default_rng(6)
        u = rng.standard_normal(200)
        with pytest.raises(DataError, match="zero variance"):
            em.local_projection(
                ms(np.zeros(200)), em.ShockSeries(ms(u), "iid"), H=2, L=2, hac_lag=2
            )

    def test_insufficient_sample_names_horizon(self):
        rng = np.random.default_rng(8)
        u = rng.standard_normal(30)
        y = rng.standard_normal(30)
        with pytest.raises(DataError, match="h=0"):
            em.local_projection(
                ms(y), em.ShockSeries(ms(u), "iid"), H=4, L=12, hac_lag=2
            )

    def test_bilinearity_in_shock_scale(self):
        rng = np.random.default_rng(10)
        T = 300
        u = rng.standard_normal(T)
        y = np.convolve(u, [0.3, 0.2])[:T] + rng.normal(0, 0.1, T)
        base = em.local_projection(
            ms(y), em.ShockSeries(ms(u), "iid"), H=4, L=3, hac_lag=3
        )
        c = 3.7
        scaled = em.local_projection(
            ms(y), em.ShockSeries(ms(c * u), "iid"), H=4, L=3, hac_lag=3
        )
        assert np.allclose(scaled.beta(), base.beta() / c, atol=1e-10)

    def test_white_noise_size_pooled(self):
        inside = total = 0
        for rep in range(25):
            rng = np.random.default_rng(2000 + rep)
            u = rng.standard_normal(2400)
            y = rng.standard_normal(2400)
            tbl = em.local_projection(
                ms(y), em.ShockSeries(ms(u), "iid"), H=12, L=12, hac_lag=12
            )
            inside += int(np.sum(np.abs(tbl.beta()) < 2.0 * tbl.se()))
            total += 13
        assert inside / total >= 0.95

    def test_sample_predicate_restricts_rows(self):
        rng = np.random.default_rng(12)
        T = 400
        u = rng.standard_normal(T)
        y = np.convolve(u, [0.5])[:T] + rng.normal(0, 0.1, T)
        keep_from = START + 200

        tbl = em.local_projection(
            ms(y),
            em.ShockSeries(ms(u), "iid"),
            H=1,
            L=2,
            sample=lambda m: m >= keep_from,
            hac_lag=2,
        )
        assert tbl.rows[0].n <= 200


class TestIrfTable:
    def make(self):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(300)
        y = np.convolve(u, [0.4, 0.1])[:300] + rng.normal(0, 0.2, 300)
        return em.local_projection(
            ms(y),
            em.ShockSeries(ms(u), "ar_resid(12)", phase_label="cash"),
            H=6,
            L=3,
            hac_lag=6,
            phase="cash",
            response="pi_core",
        )

    def test_ci_identity_holds(self):
        tbl = self.make()
        for r in tbl.rows:
            assert r.ci_low == pytest.approx(r.beta - 1.96 * r.se, abs=1e-12)
            assert r.ci_high == pytest.approx(r.beta + 1.96 * r.se, abs=1e-12)

    def test_csv_roundtrip_zero_loss(self, tmp_path):
        tbl = self.make()
        path = tmp_path / "irf.csv"
        em.irf_to_csv(tbl, path)
        back = em.irf_from_csv(path)
        assert back == tbl

    def test_gap_rejected(self):
        row = em.IRFRow(h=1, beta=0.0, se=1.0, ci_low=-1.96, ci_high=1.96, n=10)
        with pytest.raises(DataError, match="without gaps"):
            em.IRFTable(
                rows=(row,), phase="cash", shock_definition="x", response="y",
                horizon=1, lags=1,
            )


class TestBreakpoint:
    def test_planted_break_found_exactly(self):
        # flat then a discontinuous rising line: the break month is unique
        y = np.concatenate([np.full(60, 5.0), 50.0 + 0.5 * np.arange(60.0)])
        res = em.breakpoint(ms(y), (START, START + 119))
        assert res.tau == START + 59
        assert res.rss < 1e-18
        assert not res.tie

    def test_continuous_hinge_ties_at_kink(self):
        # for a continuous kink the joint month lies on both lines, so the
        # two adjacent breakpoints fit exactly; earliest wins, tie flagged
        y = np.concatenate([np.full(60, 5.0), 5.0 + np.arange(1.0, 61.0)])
        res = em.breakpoint(ms(y), (START, START + 119))
        assert res.tau == START + 58
        assert res.tie

    def test_pure_line_ties_earliest(self):
        y = 2.0 + 0.3 * np.arange(120.0)
        res = em.breakpoint(ms(y), (START, START + 119))
        assert res.tie
        assert res.tau == START + 23  # earliest admissible

    def test_matches_rescan_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n = int(rng.integers(60, 160))
            y = np.cumsum(rng.standard_normal(n)) + 0.05 * np.arange(n)
            res = em.breakpoint(ms(y), (START, START + n - 1))
            c_oracle, rss_oracle = breakpoint_rescan_oracle(y)
            assert res.tau - START == c_oracle
            assert res.rss == pytest.approx(rss_oracle, rel=1e-8, abs=1e-8)

    def test_rss_is_minimal_over_full_scan(self):
        rng = np.random.default_rng(14)
        n = 100
        y = rng.standard_normal(n)
        res = em.breakpoint(ms(y), (START, START + n - 1))
        _, rss_oracle = breakpoint_rescan_oracle(y)
        assert res.rss <= rss_oracle + 1e-9

    def test_window_too_short(self):
        with pytest.raises(DataError, match="needs at least"):
            em.breakpoint(ms(np.arange(48.0)), (START, START + 47))

    def test_missing_in_window_rejected(self):
        y = [1.0] * 60
        y[30] = None
        with pytest.raises(DataError, match="missing"):
            em.breakpoint(ms(y), (START, START + 59))


class TestDetrendedShock:
    def test_pure_trend_absorbed(self):
        x = 3.0 + 0.1 * np.arange(200.0)
        shock = em.detrended_shock(ms(x), 0)
        assert np.nanmax(np.abs(shock.values.values)) < 1e-10
        assert shock.definition == "detrended(0)"

    def test_variance_reduced_on_trended_ar(self):
        rng = np.random.default_rng(15)
        T = 600
        x = np.zeros(T)
        for t in range(1, T):
            x[t] = 0.6 * x[t - 1] + rng.standard_normal()
        x = x + 0.05 * np.arange(T)
        shock = em.detrended_shock(ms(x), 1)
        assert np.nanvar(shock.values.values) < np.var(x)

    def test_close_to_ar_fit_when_no_trend(self):
        rng = np.random.default_rng(16)
        T = 1500
        x = np.zeros(T)
        for t in range(1, T):
            x[t] = 0.4 * x[t - 1] + rng.standard_normal()
        _, ar_shock = em.ar_fit(ms(x), 12)
        de_shock = em.detrended_shock(ms(x), 12)
        a = ar_shock.values.values
        d = de_shock.values.values
        mask = ~np.isnan(a) & ~np.isnan(d)
        sd = np.std(a[mask])
        assert np.max(np.abs(a[mask] - d[mask])) < 2.0 * sd
