"""Shared fixtures: the mechanism economy is built once per session."""

from __future__ import annotations

import time
import warnings

import numpy as np
import pytest

from monephase.config import RunConfig
from monephase.csvio import read_csv
from monephase.pipeline import (
    cmd_calibrate,
    cmd_irf,
    cmd_transform,
    read_irf_pair,
    read_panel_csv,
)
from monephase.synth import generate, two_compartment_spec, write_economy

MECHANISM_SEED = 11


@pytest.fixture(scope="session")
def mechanism_run(tmp_path_factory):
    """End-to-end artifacts for the reference two-compartment economy.

    Generates the economy, runs transform + irf (with the robustness
    sweep) + calibrate into one temp directory, and hands back the parsed
    outputs every downstream test needs.
    """
    out = tmp_path_factory.mktemp("mechanism")
    t_start = time.time()
    spec = two_compartment_spec(seed=MECHANISM_SEED)
    panel, truth = generate(spec)
    write_economy(out, panel, truth)
    cfg = RunConfig(
        monetary_path=str(out / "monetary.csv"),
        cpi_path=str(out / "cpi.csv"),
        out_dir=str(out),
        robustness=True,
        seed=MECHANISM_SEED,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # synthetic CPI is not 2020-based
        cmd_transform(cfg)
        cmd_irf(cfg)
        cmd_calibrate(cfg)
    elapsed = time.time() - t_start

    pi_tables = read_irf_pair(out / "IRF_J6_core_inflation.csv")
    phi_tables = read_irf_pair(out / "IRF_J7_phi.csv")
    _, _, crit_rows = read_csv(out / "critical_point_summary.csv")
    _, _, mean_rows = read_csv(out / "phase_means.csv")
    return {
        "spec": spec,
        "truth": truth,
        "cfg": cfg,
        "out": out,
        "panel": read_panel_csv(out / "panel.csv"),
        "pi_tables": pi_tables,
        "phi_tables": phi_tables,
        "phi_c": float(crit_rows[0][0]),
        "s_pi": float(crit_rows[0][1]),
        "phase_means": {cells[0]: float(cells[1]) for cells in mean_rows},
        "elapsed": elapsed,
    }


def medium_window(H: int) -> slice:
    """Medium horizons: 6..min(18, H), inclusive."""
    return slice(6, min(18, H) + 1)


def rk4_compartments(A, B, delta, gamma, eta, h_max=60, substeps=64):
    """Classical RK4 on the two-compartment system; independent oracle."""
    dt = 1.0 / substeps
    state = np.array([A, B], dtype=np.float64)

    def f(s):
        return np.array([-delta * s[0] + eta * s[1], -gamma * s[1]])

    out = [state.copy()]
    for step in range(h_max * substeps):
        k1 = f(state)
        k2 = f(state + dt / 2 * k1)
        k3 = f(state + dt / 2 * k2)
        k4 = f(state + dt * k3)
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if (step + 1) % substeps == 0:
            out.append(state.copy())
    return np.array(out)


def hac_double_sum_oracle(X, residuals, max_lag):
    """Naive O(n^2 L) construction of the Newey-West sandwich."""
    X = np.asarray(X, dtype=float)
    u = np.asarray(residuals, dtype=float)
    n, k = X.shape
    S = np.zeros((k, k))
    for j in range(-max_lag, max_lag + 1):
        w = 1.0 - abs(j) / (max_lag + 1.0)
        for t in range(n):
            s = t - j
            if 0 <= s < n:
                S += w * np.outer(X[t] * u[t], X[s] * u[s])
    bread = np.linalg.inv(X.T @ X)
    V = bread @ S @ bread
    return (V + V.T) / 2.0


def breakpoint_rescan_oracle(values, min_seg=24):
    """Exhaustive re-scan fitting each segment with lstsq; returns argmin index."""
    n = len(values)
    t = np.arange(n, dtype=float)
    best_rss, best_c = np.inf, None
    for c in range(min_seg - 1, n - min_seg):
        rss = 0.0
        for seg in (slice(0, c + 1), slice(c + 1, n)):
            Xs = np.column_stack([np.ones(t[seg].size), t[seg]])
            coef, _, _, _ = np.linalg.lstsq(Xs, values[seg], rcond=None)
            r = values[seg] - Xs @ coef
            rss += float(r @ r)
        if rss < best_rss:
            best_rss, best_c = rss, c
    return best_c, best_rss
