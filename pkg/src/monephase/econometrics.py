"""Regression kernel: OLS, Newey-West covariance, AR shocks, local projections.

Everything here is a pure function of arrays pulled out of MonthlySeries
objects. Conventions are pinned so that independent oracles can match
bit-for-bit where the contracts say so:

* OLS is solved through a singular value decomposition; a design matrix
  whose smallest singular value falls below 1e-10 of the largest is
  rejected as collinear.
* The HAC sandwich uses Bartlett weights w_j = 1 - |j|/(L+1) and no
  small-sample degrees-of-freedom correction (denominator n).
* Confidence intervals are beta +/- 1.96 * se.
* Two-segment breakpoints are exhaustive grid searches; ties go to the
  earliest admissible month and are flagged.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .csvio import parse_float_cell, read_csv, write_csv
from .errors import CollinearityError, DataError
from .series import MonthIndex, MonthlySeries

RANK_TOLERANCE = 1e-10
CI_MULTIPLIER = 1.96


@dataclass(frozen=True)
class RegressionResult:
    """OLS output kept rich enough to feed the HAC sandwich afterwards."""

    coefficients: np.ndarray
    residuals: np.ndarray
    xtx_inverse: np.ndarray
    n: int
    k: int


def ols(X: np.ndarray, y: np.ndarray) -> RegressionResult:
    """Least squares via SVD.

    Raises CollinearityError when X is rank deficient at the relative
    tolerance above, and DataError when there are not more rows than
    columns.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if n <= k:
        raise DataError(f"need more observations than regressors (n={n}, k={k})")
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if s[-1] < RANK_TOLERANCE * s[0]:
        raise CollinearityError(
            f"rank-deficient design: singular values span {s[0]:.3e}..{s[-1]:.3e}"
        )
    coef = Vt.T @ ((U.T @ y) / s)
    residuals = y - X @ coef
    xtx_inverse = (Vt.T / s**2) @ Vt
    return RegressionResult(coef, residuals, xtx_inverse, n, k)


def hac_covariance(X: np.ndarray, residuals: np.ndarray, max_lag: int) -> np.ndarray:
    """Newey-West sandwich covariance of OLS coefficients.

    With max_lag = 0 this collapses to the heteroskedasticity-robust
    (White) sandwich. The returned matrix is symmetrized.
    """
    X = np.asarray(X, dtype=np.float64)
    u = np.asarray(residuals, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if max_lag < 0:
        raise DataError(f"max_lag must be nonnegative, got {max_lag}")
    if max_lag >= n:
        raise DataError(f"max_lag {max_lag} must be below the sample size {n}")
    xu = X * u[:, None]
    S = xu.T @ xu
    for j in range(1, max_lag + 1):
        w = 1.0 - j / (max_lag + 1.0)
        gamma = xu[j:].T @ xu[:-j]
        S = S + w * (gamma + gamma.T)
    bread = np.linalg.inv(X.T @ X)
    V = bread @ S @ bread
    return (V + V.T) / 2.0


@dataclass(frozen=True)
class ShockSeries:
    """A residual shock aligned to the calendar it was estimated on."""

    values: MonthlySeries
    definition: str
    phase_label: str = ""
    standardized: bool = False


def _usable_rows(
    x: np.ndarray,
    positions_by_segment: list[tuple[int, int]],
    p: int,
) -> list[int]:
    """Rows whose own value and all p lags are finite and inside one segment."""
    rows = []
    for a, b in positions_by_segment:
        for t in range(a + p, b + 1):
            window = x[t - p : t + 1]
            if not np.isnan(window).any():
                rows.append(t)
    return rows


def _segment_positions(
    series: MonthlySeries,
    segments: Sequence[tuple[MonthIndex, MonthIndex]] | None,
) -> list[tuple[int, int]]:
    if segments is None:
        return [(0, len(series) - 1)]
    out = []
    for a, b in segments:
        if a > b:
            raise DataError(f"segment {a}..{b} is empty")
        out.append((series.position(a), series.position(b)))
    return out


def ar_fit(
    x: MonthlySeries,
    p: int,
    segments: Sequence[tuple[MonthIndex, MonthIndex]] | None = None,
    phase_label: str = "",
) -> tuple[np.ndarray, ShockSeries]:
    """AR(p) by OLS with intercept; residuals are the unexpected component.

    Rows are pooled across the given contiguous segments; a row is usable
    only when all its lags stay inside the same segment, so no dynamics
    are fabricated across gaps. Residuals come back unstandardized and
    defined only on usable rows.
    """
    if p < 1:
        raise DataError(f"autoregressive order must be >= 1, got {p}")
    vals = x.values
    rows = _usable_rows(vals, _segment_positions(x, segments), p)
    if len(rows) <= p + 1:
        raise DataError(
            f"too few usable rows for AR({p}): {len(rows)} (need > {p + 1})"
        )
    rows_arr = np.asarray(rows)
    X = np.column_stack(
        [np.ones(len(rows))] + [vals[rows_arr - lag] for lag in range(1, p + 1)]
    )
    fit = ols(X, vals[rows_arr])
    resid = np.full_like(vals, np.nan)
    resid[rows_arr] = fit.residuals
    shock = ShockSeries(
        values=MonthlySeries(x.start, resid),
        definition=f"ar_resid({p})",
        phase_label=phase_label,
        standardized=False,
    )
    return fit.coefficients, shock


def detrended_shock(
    x: MonthlySeries,
    lags: int,
    segments: Sequence[tuple[MonthIndex, MonthIndex]] | None = None,
    phase_label: str = "",
) -> ShockSeries:
    """Residual of x on an intercept, linear time trend, and own lags."""
    if lags < 0:
        raise DataError(f"lag count must be >= 0, got {lags}")
    vals = x.values
    rows = _usable_rows(vals, _segment_positions(x, segments), lags)
    if len(rows) <= lags + 2:
        raise DataError(
            f"too few usable rows for detrended shock: {len(rows)} "
            f"(need > {lags + 2})"
        )
    rows_arr = np.asarray(rows)
    cols = [np.ones(len(rows)), rows_arr.astype(np.float64)]
    cols += [vals[rows_arr - lag] for lag in range(1, lags + 1)]
    fit = ols(np.column_stack(cols), vals[rows_arr])
    resid = np.full_like(vals, np.nan)
    resid[rows_arr] = fit.residuals
    return ShockSeries(
        values=MonthlySeries(x.start, resid),
        definition=f"detrended({lags})",
        phase_label=phase_label,
        standardized=False,
    )


def standardize(shock: ShockSeries) -> ShockSeries:
    """Scale to unit sample variance (ddof=1); the mean is left untouched."""
    vals = shock.values.values
    mask = ~np.isnan(vals)
    if mask.sum() < 2:
        raise DataError("standardize needs at least two defined values")
    sd = float(np.std(vals[mask], ddof=1))
    if sd == 0.0:
        raise DataError("degenerate shock: zero sample variance")
    return ShockSeries(
        values=shock.values.with_values(vals / sd),
        definition=shock.definition,
        phase_label=shock.phase_label,
        standardized=True,
    )


@dataclass(frozen=True)
class IRFRow:
    h: int
    beta: float
    se: float
    ci_low: float
    ci_high: float
    n: int


@dataclass(frozen=True)
class IRFTable:
    """Per-horizon impulse-response estimates plus run metadata."""

    rows: tuple[IRFRow, ...]
    phase: str
    shock_definition: str
    response: str
    horizon: int
    lags: int

    def __post_init__(self):
        hs = [r.h for r in self.rows]
        if hs != list(range(self.horizon + 1)):
            raise DataError(
                f"IRF table must cover h = 0..{self.horizon} without gaps, got {hs}"
            )
        for r in self.rows:
            if abs(r.ci_low - (r.beta - CI_MULTIPLIER * r.se)) > 1e-12 or abs(
                r.ci_high - (r.beta + CI_MULTIPLIER * r.se)
            ) > 1e-12:
                raise DataError(f"confidence bounds inconsistent at h={r.h}")

    def beta(self) -> np.ndarray:
        return np.array([r.beta for r in self.rows])

    def se(self) -> np.ndarray:
        return np.array([r.se for r in self.rows])


IRF_HEADER = ("h", "beta", "se", "ci_low", "ci_high", "n")


def irf_to_csv(table: IRFTable, path: Path | str) -> Path:
    preamble = [
        ("phase", table.phase),
        ("shock_definition", table.shock_definition),
        ("response_variable", table.response),
        ("H", table.horizon),
        ("L", table.lags),
    ]
    rows = [(r.h, r.beta, r.se, r.ci_low, r.ci_high, r.n) for r in table.rows]
    return write_csv(path, IRF_HEADER, rows, preamble=preamble)


def irf_from_csv(path: Path | str) -> IRFTable:
    preamble, header, raw = read_csv(path)
    if tuple(header) != IRF_HEADER:
        raise DataError(f"unexpected IRF header {header!r}")
    for key in ("phase", "shock_definition", "response_variable", "H", "L"):
        if key not in preamble:
            raise DataError(f"IRF file missing metadata key {key!r}")
    rows = tuple(
        IRFRow(
            h=int(cells[0]),
            beta=parse_float_cell(cells[1]),
            se=parse_float_cell(cells[2]),
            ci_low=parse_float_cell(cells[3]),
            ci_high=parse_float_cell(cells[4]),
            n=int(cells[5]),
        )
        for cells in raw
    )
    return IRFTable(
        rows=rows,
        phase=preamble["phase"],
        shock_definition=preamble["shock_definition"],
        response=preamble["response_variable"],
        horizon=int(preamble["H"]),
        lags=int(preamble["L"]),
    )


def local_projection(
    y: MonthlySeries,
    shock: ShockSeries,
    H: int,
    L: int,
    sample: Callable[[MonthIndex], bool] | np.ndarray | None = None,
    hac_lag: int = 12,
    phase: str = "",
    response: str = "",
) -> IRFTable:
    """Horizon-by-horizon projection of y on the shock with lag controls.

    For each h in 0..H, regress y_{t+h} on an intercept, u_t, L lags of y,
    and L lags of u over rows where t passes the sample predicate and all
    regressors and the outcome exist. The reported coefficient is the one
    on u_t with a Newey-West standard error.

    The shock enters exactly as given; standardize first if unit-shock
    kernels are wanted.
    """
    if H < 0 or L < 0:
        raise DataError("H and L must be nonnegative")
    u_series = shock.values
    start = max(y.start, u_series.start)
    end = min(y.end, u_series.end)
    if start > end:
        raise DataError("outcome and shock do not overlap")
    yv = y.restrict(start, end).values
    uv = u_series.restrict(start, end).values
    n = len(yv)

    if sample is None:
        keep = np.ones(n, dtype=bool)
    elif callable(sample):
        keep = np.array([bool(sample(start + t)) for t in range(n)])
    else:
        keep = np.asarray(sample, dtype=bool)
        if keep.shape != (n,):
            raise DataError("sample mask length must match the overlap range")

    y_ok = ~np.isnan(yv)
    u_ok = ~np.isnan(uv)
    base = keep & u_ok
    for lag in range(1, L + 1):
        lag_ok = np.zeros(n, dtype=bool)
        lag_ok[lag:] = y_ok[:-lag] & u_ok[:-lag]
        base &= lag_ok

    rows_out = []
    for h in range(H + 1):
        usable = base.copy()
        if h > 0:
            ahead = np.zeros(n, dtype=bool)
            ahead[:-h] = y_ok[h:]
            usable &= ahead
        else:
            usable &= y_ok
        t_idx = np.flatnonzero(usable)
        if t_idx.size <= 2 * L + 2:
            raise DataError(
                f"horizon h={h}: only {t_idx.size} usable rows "
                f"(need > {2 * L + 2})"
            )
        outcome = yv[t_idx + h]
        if np.ptp(outcome) == 0.0:
            raise DataError(f"horizon h={h}: outcome has zero variance")
        cols = [np.ones(t_idx.size), uv[t_idx]]
        cols += [yv[t_idx - lag] for lag in range(1, L + 1)]
        cols += [uv[t_idx - lag] for lag in range(1, L + 1)]
        X = np.column_stack(cols)
        fit = ols(X, outcome)
        cov = hac_covariance(X, fit.residuals, hac_lag)
        beta = float(fit.coefficients[1])
        se = float(np.sqrt(max(cov[1, 1], 0.0)))
        rows_out.append(
            IRFRow(
                h=h,
                beta=beta,
                se=se,
                ci_low=beta - CI_MULTIPLIER * se,
                ci_high=beta + CI_MULTIPLIER * se,
                n=int(t_idx.size),
            )
        )
    return IRFTable(
        rows=tuple(rows_out),
        phase=phase or shock.phase_label,
        shock_definition=shock.definition,
        response=response,
        horizon=H,
        lags=L,
    )


@dataclass(frozen=True)
class BreakResult:
    """Best single break of a two-segment linear fit inside a window.

    segment_fits holds (intercept, slope) for each side, with time measured
    in months since the window start; tau is the last month of the left
    segment.
    """

    tau: MonthIndex
    rss: float
    segment_fits: tuple[float, float, float, float]
    window: tuple[MonthIndex, MonthIndex]
    tie: bool = False


def _line_rss(sx, sy, sxx, sxy, syy, m):
    """RSS and (intercept, slope) of a least-squares line from raw moments."""
    det = m * sxx - sx * sx
    if det <= 0.0:
        return max(syy - sy * sy / m, 0.0), (sy / m, 0.0)
    slope = (m * sxy - sx * sy) / det
    intercept = (sy - slope * sx) / m
    rss = syy - intercept * sy - slope * sxy
    return max(rss, 0.0), (intercept, slope)


TIE_TOLERANCE = 1e-10


def breakpoint(
    y: MonthlySeries,
    window: tuple[MonthIndex, MonthIndex],
    min_seg: int = 24,
) -> BreakResult:
    """Exhaustive single-break search minimizing two-segment RSS.

    tau is the last month of the left segment; both segments keep at
    least min_seg months. Ties within an absolute slack of 1e-10 go to
    the earliest tau and set the tie flag.
    """
    a, b = window
    sliced = y.restrict(a, b)
    vals = sliced.values
    n = len(vals)
    if n < 2 * min_seg + 1:
        raise DataError(
            f"window {a}..{b} has {n} months, needs at least {2 * min_seg + 1}"
        )
    if np.isnan(vals).any():
        month = a + int(np.argmax(np.isnan(vals)))
        raise DataError(f"breakpoint window has a missing value at {month}")

    t = np.arange(n, dtype=np.float64)
    cx = np.concatenate([[0.0], np.cumsum(t)])
    cy = np.concatenate([[0.0], np.cumsum(vals)])
    cxx = np.concatenate([[0.0], np.cumsum(t * t)])
    cxy = np.concatenate([[0.0], np.cumsum(t * vals)])
    cyy = np.concatenate([[0.0], np.cumsum(vals * vals)])

    candidates = range(min_seg - 1, n - min_seg)
    scan = []
    for c in candidates:
        m_left = c + 1
        rss_l, (a1, b1) = _line_rss(cx[c + 1], cy[c + 1], cxx[c + 1], cxy[c + 1], cyy[c + 1], m_left)
        m_right = n - m_left
        rss_r, (a2, b2) = _line_rss(
            cx[n] - cx[c + 1],
            cy[n] - cy[c + 1],
            cxx[n] - cxx[c + 1],
            cxy[n] - cxy[c + 1],
            cyy[n] - cyy[c + 1],
            m_right,
        )
        scan.append((rss_l + rss_r, c, (a1, b1, a2, b2)))

    rss_min = min(entry[0] for entry in scan)
    slack = TIE_TOLERANCE * (1.0 + rss_min)
    near = [entry for entry in scan if entry[0] <= rss_min + slack]
    rss_best, c_best, fits = near[0]  # earliest tau among ties
    return BreakResult(
        tau=a + c_best,
        rss=float(rss_best),
        segment_fits=tuple(float(v) for v in fits),
        window=(a, b),
        tie=len(near) > 1,
    )
