"""Batch commands: each is a pure function of (config, input files).

Identical inputs produce byte-identical outputs: seeds are fixed in the
config, CSV row order is fixed (phase first, then horizon), and floats
are written in shortest round-trip form.
"""

from __future__ import annotations

import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import econometrics as em
from . import landau as ld
from .compartment import CalibrationResult, calibrate, steady_state_phi
from .config import RunConfig, config_text, era_label
from .csvio import fmt, parse_float_cell, read_csv, write_csv
from .efficiency import efficiencies
from .errors import ConvergenceError, DataError
from .ingest import load_cpi, load_monetary
from .phase import (
    CASH,
    INTERMEDIATE,
    RESERVE,
    PhasePartition,
    PhaseThresholds,
    classify,
    fit_tanh,
    phase_means,
)
from .series import MonthIndex, MonthlySeries, Panel, index_to_base, merge, order_parameter, yoy
from .synth import default_spec, generate, write_economy

PANEL_COLUMNS = (
    "date",
    "MB",
    "BN",
    "CO",
    "RB",
    "MB_SA",
    "CPI",
    "CPI_core",
    "phi",
    "pi",
    "pi_core",
    "g_mb",
    "idx_MB_SA",
    "idx_CPI",
    "idx_CPI_core",
    "era",
)

IRF_PI_FILE = "IRF_J6_core_inflation.csv"
IRF_PHI_FILE = "IRF_J7_phi.csv"


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_panel(cfg: RunConfig) -> Panel:
    """Load both inputs, merge, and attach every derived series."""
    if not cfg.monetary_path or not cfg.cpi_path:
        raise DataError("config must set data.monetary and data.cpi")
    monetary = load_monetary(cfg.monetary_path)
    cpi = load_cpi(cfg.cpi_path)
    named = {name: monetary[name] for name in monetary.names}
    named.update({name: cpi[name] for name in cpi.names})
    panel = merge(named)
    phi = order_parameter(panel["RB"], panel["MB"])
    derived = {
        "phi": phi,
        "pi": yoy(panel["CPI"]),
        "pi_core": yoy(panel["CPI_core"]),
        "g_mb": yoy(panel["MB_SA"]),
        "idx_MB_SA": index_to_base(panel["MB_SA"]),
        "idx_CPI": index_to_base(panel["CPI"]),
        "idx_CPI_core": index_to_base(panel["CPI_core"]),
    }
    for name, s in derived.items():
        panel = panel.with_series(name, s)
    return panel


def write_panel_csv(path: Path, panel: Panel) -> Path:
    rows = []
    for i, month in enumerate(panel.months()):
        row = [str(month)]
        for name in PANEL_COLUMNS[1:-1]:
            row.append(fmt(float(panel[name].values[i])))
        row.append(era_label(month.year))
        rows.append(row)
    return write_csv(path, PANEL_COLUMNS, rows)


def read_panel_csv(path: Path | str) -> Panel:
    _, header, raw = read_csv(path)
    if tuple(header) != PANEL_COLUMNS:
        raise DataError(f"unexpected panel header in {path}")
    if not raw:
        raise DataError(f"panel file {path} is empty")
    start = MonthIndex.parse(raw[0][0])
    columns = {name: [] for name in PANEL_COLUMNS[1:-1]}
    for cells in raw:
        for name, cell in zip(PANEL_COLUMNS[1:-1], cells[1:-1]):
            columns[name].append(parse_float_cell(cell))
    series = {
        name: MonthlySeries(start, np.asarray(vals)) for name, vals in columns.items()
    }
    return Panel(start, len(raw), series)


def cmd_transform(cfg: RunConfig) -> list[Path]:
    panel = build_panel(cfg)
    return [write_panel_csv(_out(cfg) / "panel.csv", panel)]


def _load_panel(cfg: RunConfig) -> Panel:
    path = _out(cfg) / "panel.csv"
    if not path.exists():
        raise DataError(f"{path} not found; run the transform command first")
    return read_panel_csv(path)


def cmd_breakpoints(cfg: RunConfig) -> list[Path]:
    """Two-segment break search per (series, window) over the config clusters."""
    panel = _load_panel(cfg)
    mb_sa = panel["MB_SA"].values
    if (mb_sa[~np.isnan(mb_sa)] <= 0).any():
        raise DataError("MB_SA must be positive to take logs")
    targets = {
        "log_MB_SA": MonthlySeries(panel.start, np.log(mb_sa)),
        "phi": panel["phi"],
        "pi_core": panel["pi_core"],
    }
    rows = []
    for cluster, windows in cfg.clusters.items():
        for a, b in windows:
            for name, series in targets.items():
                if a < series.start or b > series.end:
                    warnings.warn(
                        f"window {a}..{b} outside data range "
                        f"{series.start}..{series.end}; skipped",
                        stacklevel=2,
                    )
                    continue
                sliced = series.restrict(a, b)
                if np.isnan(sliced.values).any():
                    warnings.warn(
                        f"series {name} not fully defined on {a}..{b}; skipped",
                        stacklevel=2,
                    )
                    continue
                res = em.breakpoint(series, (a, b), min_seg=cfg.min_segment)
                rows.append(
                    (
                        name,
                        cluster,
                        str(a),
                        str(b),
                        str(res.tau),
                        res.rss,
                        res.tie,
                    )
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    path = write_csv(
        _out(cfg) / "breakpoints.csv",
        ("series", "cluster", "window_start", "window_end", "tau", "rss", "tie"),
        rows,
    )
    return [path]


def cmd_fit_phase(cfg: RunConfig) -> list[Path]:
    panel = _load_panel(cfg)
    fit = fit_tanh(panel["phi"], (cfg.tanh_start, cfg.tanh_end))
    path = write_csv(
        _out(cfg) / "tanh_fit.csv",
        ("phi0", "A", "t0_calendar", "w_months", "sse", "converged"),
        [
            (
                fit.phi0,
                fit.A,
                fit.t0_calendar_str(),
                fit.w,
                fit.sse,
                fit.converged,
            )
        ],
        preamble=[
            ("window", f"{cfg.tanh_start}:{cfg.tanh_end}"),
            ("degenerate_width", fit.degenerate_width),
            ("trustworthy", fit.trustworthy),
        ],
    )
    if not fit.converged:
        raise ConvergenceError("tanh fit did not converge", partial=path)
    return [path]


def _phase_shock(
    cfg: RunConfig, g: MonthlySeries, partition: PhasePartition, label: str
) -> em.ShockSeries:
    segments = partition.segments(label)
    if not segments:
        raise DataError(f"phase {label!r} is empty; cannot build shocks")
    if cfg.shock_kind == "ar_resid":
        _, shock = em.ar_fit(g, cfg.shock_p, segments, phase_label=label)
    else:
        shock = em.detrended_shock(g, cfg.shock_p, segments, phase_label=label)
    return em.standardize(shock)


def _phase_irfs(cfg: RunConfig, panel: Panel, thresholds: PhaseThresholds):
    """Per-phase standardized shocks and the four baseline LP tables."""
    partition = classify(panel["phi"], thresholds)
    tables = {}
    for label in (CASH, RESERVE):
        shock = _phase_shock(cfg, panel["g_mb"], partition, label)
        mask = partition.mask(label)
        sample = MonthlySeries(panel.start, np.where(mask, 1.0, 0.0))

        def predicate(month, _s=sample):
            return _s.values[_s.position(month)] == 1.0

        for response, series in (("pi_core", panel["pi_core"]), ("phi", panel["phi"])):
            tables[(label, response)] = em.local_projection(
                series,
                shock,
                H=cfg.horizon,
                L=cfg.lags,
                sample=predicate,
                hac_lag=cfg.hac_lag,
                phase=label,
                response=response,
            )
    return partition, tables


def write_irf_pair(
    path: Path,
    cash: em.IRFTable,
    reserve: em.IRFTable,
    extra_preamble: tuple = (),
) -> Path:
    preamble = [
        ("response_variable", cash.response),
        ("shock_definition", cash.shock_definition),
        ("H", cash.horizon),
        ("L", cash.lags),
    ] + list(extra_preamble)
    rows = []
    for table in (cash, reserve):  # fixed order: phase, then horizon
        for r in table.rows:
            rows.append((table.phase, r.h, r.beta, r.se, r.ci_low, r.ci_high, r.n))
    return write_csv(
        path, ("phase", "h", "beta", "se", "ci_low", "ci_high", "n"), rows, preamble
    )


def read_irf_pair(path: Path | str) -> dict[str, em.IRFTable]:
    preamble, header, raw = read_csv(path)
    if tuple(header) != ("phase", "h", "beta", "se", "ci_low", "ci_high", "n"):
        raise DataError(f"unexpected IRF header in {path}")
    by_phase: dict[str, list[em.IRFRow]] = {}
    for cells in raw:
        row = em.IRFRow(
            h=int(cells[1]),
            beta=parse_float_cell(cells[2]),
            se=parse_float_cell(cells[3]),
            ci_low=parse_float_cell(cells[4]),
            ci_high=parse_float_cell(cells[5]),
            n=int(cells[6]),
        )
        by_phase.setdefault(cells[0], []).append(row)
    out = {}
    for phase, rows in by_phase.items():
        out[phase] = em.IRFTable(
            rows=tuple(sorted(rows, key=lambda r: r.h)),
            phase=phase,
            shock_definition=preamble["shock_definition"],
            response=preamble["response_variable"],
            horizon=int(preamble["H"]),
            lags=int(preamble["L"]),
        )
    return out


def _robustness_variants(cfg: RunConfig):
    """One-dimensional sweeps around the baseline, deterministic order."""
    variants = []
    for cash_max in (0.25, 0.30, 0.35):
        for reserve_min in (0.55, 0.60, 0.65):
            variants.append(
                (
                    f"thresholds_{cash_max:.2f}_{reserve_min:.2f}",
                    replace(cfg, cash_max=cash_max, reserve_min=reserve_min),
                )
            )
    for H in (12, 24, 36):
        variants.append((f"H_{H}", replace(cfg, horizon=H)))
    for L in (6, 12, 18):
        variants.append((f"L_{L}", replace(cfg, lags=L)))
    for label, kind, p in (
        ("shock_ar6", "ar_resid", 6),
        ("shock_ar12", "ar_resid", 12),
        ("shock_ar18", "ar_resid", 18),
        ("shock_detrended", "detrended", 12),
    ):
        variants.append((label, replace(cfg, shock_kind=kind, shock_p=p)))
    return variants


def cmd_irf(cfg: RunConfig) -> list[Path]:
    panel = _load_panel(cfg)
    thresholds = PhaseThresholds(cfg.cash_max, cfg.reserve_min)
    partition, tables = _phase_irfs(cfg, panel, thresholds)
    out = _out(cfg)
    written = [
        write_irf_pair(
            out / IRF_PI_FILE, tables[(CASH, "pi_core")], tables[(RESERVE, "pi_core")]
        ),
        write_irf_pair(
            out / IRF_PHI_FILE, tables[(CASH, "phi")], tables[(RESERVE, "phi")]
        ),
    ]
    phi_bar_cash, phi_bar_reserve = phase_means(panel["phi"], partition)
    written.append(
        write_csv(
            out / "phase_means.csv",
            ("phase", "phi_bar", "n_months"),
            [
                (CASH, phi_bar_cash, int(partition.mask(CASH).sum())),
                (RESERVE, phi_bar_reserve, int(partition.mask(RESERVE).sum())),
            ],
        )
    )

    if cfg.intermediate_diagnostic:
        written.append(_intermediate_diagnostic(cfg, panel, partition, out))
    if cfg.robustness:
        written.append(_robustness_sweep(cfg, panel, out))
    return written


def _intermediate_diagnostic(cfg, panel, partition, out: Path) -> Path:
    """LP inside the critical band; expected to be unstable, flagged as such."""
    preamble = [("unstable_region", True)]
    rows = []
    try:
        shock = _phase_shock(cfg, panel["g_mb"], partition, INTERMEDIATE)
        mask = partition.mask(INTERMEDIATE)
        sample = MonthlySeries(panel.start, np.where(mask, 1.0, 0.0))

        def predicate(month, _s=sample):
            return _s.values[_s.position(month)] == 1.0

        for response, series in (("pi_core", panel["pi_core"]), ("phi", panel["phi"])):
            table = em.local_projection(
                series,
                shock,
                H=cfg.horizon,
                L=cfg.lags,
                sample=predicate,
                hac_lag=cfg.hac_lag,
                phase=INTERMEDIATE,
                response=response,
            )
            for r in table.rows:
                rows.append((response, r.h, r.beta, r.se, r.ci_low, r.ci_high, r.n))
    except DataError as exc:
        preamble.append(("error", str(exc)))
    return write_csv(
        out / "IRF_intermediate_diagnostic.csv",
        ("response", "h", "beta", "se", "ci_low", "ci_high", "n"),
        rows,
        preamble,
    )


def _robustness_sweep(cfg: RunConfig, panel: Panel, out: Path) -> Path:
    rows = []
    for name, variant in _robustness_variants(cfg):
        thresholds = PhaseThresholds(variant.cash_max, variant.reserve_min)
        _, tables = _phase_irfs(variant, panel, thresholds)
        for (label, response), table in sorted(tables.items()):
            for r in table.rows:
                rows.append(
                    (
                        name,
                        variant.cash_max,
                        variant.reserve_min,
                        variant.horizon,
                        variant.lags,
                        f"{variant.shock_kind}({variant.shock_p})",
                        label,
                        response,
                        r.h,
                        r.beta,
                        r.se,
                        r.ci_low,
                        r.ci_high,
                        r.n,
                    )
                )
    return write_csv(
        out / "IRF_robustness.csv",
        (
            "variant",
            "cash_max",
            "reserve_min",
            "H",
            "L",
            "shock",
            "phase",
            "response",
            "h",
            "beta",
            "se",
            "ci_low",
            "ci_high",
            "n",
        ),
        rows,
    )


def _read_phase_means(out: Path) -> tuple[float, float]:
    path = out / "phase_means.csv"
    if not path.exists():
        raise DataError(f"{path} not found; run the irf command first")
    _, _, raw = read_csv(path)
    means = {cells[0]: parse_float_cell(cells[1]) for cells in raw}
    return means[CASH], means[RESERVE]


def cmd_calibrate(cfg: RunConfig) -> list[Path]:
    out = _out(cfg)
    for fname in (IRF_PI_FILE, IRF_PHI_FILE):
        if not (out / fname).exists():
            raise DataError(f"{out / fname} not found; run the irf command first")
    pi_tables = read_irf_pair(out / IRF_PI_FILE)
    phi_tables = read_irf_pair(out / IRF_PHI_FILE)
    phi_bars = _read_phase_means(out)
    result = calibrate(
        irf_phi_cash=phi_tables[CASH],
        irf_pi_cash=pi_tables[CASH],
        irf_phi_reserve=phi_tables[RESERVE],
        irf_pi_reserve=pi_tables[RESERVE],
        phi_bars=phi_bars,
        seed=cfg.seed,
    )
    written = write_calibration(out, result, phi_tables, pi_tables)
    print(f"phi_c = {result.coupling.phi_c!r}")
    print(
        "ordering phi_bar_cash < phi_c < phi_bar_reserve: "
        + ("holds" if result.ordering_holds() else "violated")
    )
    if result.degenerate:
        raise ConvergenceError("calibration degenerate: fitted responses are null", partial=written)
    return written


def write_calibration(
    out: Path,
    result: CalibrationResult,
    phi_tables: dict,
    pi_tables: dict,
) -> list[Path]:
    params_rows = []
    for label, fit in (("cash", result.cash), ("reserve", result.reserve)):
        p = fit.params
        params_rows.append((label, p.A, p.B, p.delta, p.gamma, p.eta, fit.kappa))
    paths = [
        write_csv(
            out / "two_compartment_parameters.csv",
            ("phase", "A", "B", "delta", "gamma", "eta", "kappa"),
            params_rows,
        ),
        write_csv(
            out / "critical_point_summary.csv",
            ("phi_c", "s_pi", "phi_bar_cash", "phi_bar_reserve", "objective"),
            [
                (
                    result.coupling.phi_c,
                    result.coupling.s_pi,
                    result.cash.phi_bar,
                    result.reserve.phi_bar,
                    result.objective,
                )
            ],
            preamble=[
                ("converged", result.converged),
                ("degenerate", result.degenerate),
                ("ordering_holds", result.ordering_holds()),
            ],
        ),
    ]
    for label in (CASH, RESERVE):
        rows = []
        for target, table in (("phi", phi_tables[label]), ("pi_core", pi_tables[label])):
            resid = result.residuals[(label, "phi" if target == "phi" else "pi")]
            for r, dev in zip(table.rows, resid):
                rows.append((r.h, target, r.beta, r.beta + dev, dev))
        paths.append(
            write_csv(
                out / f"fit_{label}_phase.csv",
                ("h", "target", "empirical_beta", "model_value", "residual"),
                rows,
            )
        )
    return paths


def _phi_c_for_landau(cfg: RunConfig, out: Path) -> float:
    if cfg.landau_phi_c is not None:
        return cfg.landau_phi_c
    path = out / "critical_point_summary.csv"
    if not path.exists():
        raise DataError(
            "phi_c unavailable: run the calibrate command or set landau.phi_c"
        )
    _, _, raw = read_csv(path)
    return parse_float_cell(raw[0][0])


def cmd_landau(cfg: RunConfig) -> list[Path]:
    out = _out(cfg)
    phi_c = _phi_c_for_landau(cfg, out)

    sweep_rows = []
    for a in np.linspace(1.0, -1.0, 81):
        params = ld.LandauParams(a=float(a), b=1.0, h_field=0.0, phi_c=phi_c)
        stat = ld.stationary_points(params)
        sweep_rows.append(
            (
                float(a),
                stat.global_minimum,
                ld.free_energy(stat.global_minimum, params),
                stat.degenerate_pair,
            )
        )
    paths = [
        write_csv(
            out / "landau_sweep.csv",
            ("theta_or_a", "m_star", "F_min", "degenerate_flag"),
            sweep_rows,
        )
    ]

    m_grid = np.linspace(-1.5, 1.5, 121)
    pot_rows = []
    for a in (0.5, -0.5):
        params = ld.LandauParams(a=a, b=1.0, h_field=0.0, phi_c=phi_c)
        for m in m_grid:
            pot_rows.append((a, float(m), ld.free_energy(float(m), params)))
    paths.append(
        write_csv(out / "landau_potential.csv", ("a", "m", "F"), pot_rows)
    )

    theta_grid = np.linspace(-6.0, 6.0, 121)
    steady_rows = [
        (
            float(th),
            steady_state_phi(
                float(th), ctrl=(1.0, 0.0), rates=(0.06, 0.05, 0.02), injection=1.0
            ),
        )
        for th in theta_grid
    ]
    paths.append(
        write_csv(out / "steady_state_sweep.csv", ("theta", "phi_star"), steady_rows)
    )

    phi_grid = np.linspace(0.0, 1.0, 201)
    sus = ld.susceptibility(phi_grid, phi_c, epsilon=0.05)
    paths.append(
        write_csv(
            out / "susceptibility.csv",
            ("phi", "S"),
            [(float(p), float(s)) for p, s in zip(phi_grid, sus)],
        )
    )
    return paths


def cmd_efficiency(cfg: RunConfig) -> list[Path]:
    out = _out(cfg)
    pi_tables = read_irf_pair(out / IRF_PI_FILE)
    phi_tables = read_irf_pair(out / IRF_PHI_FILE)
    rows = []
    for label in (CASH, RESERVE):
        rep = efficiencies(phi_tables[label], pi_tables[label], H=cfg.horizon)
        rows.append((label, rep.eff_r, rep.argmax_r, rep.eff_c, rep.argmax_c, rep.H))
    return [
        write_csv(
            out / "efficiency.csv",
            ("phase", "eff_r", "argmax_r", "eff_c", "argmax_c", "H"),
            rows,
        )
    ]


def cmd_synth(cfg: RunConfig) -> list[Path]:
    out = _out(cfg)
    spec = default_spec(seed=cfg.seed)
    if cfg.synth_months != spec.months:
        # shrink or grow from the front so the transition stays in sample
        start = spec.start + (spec.months - cfg.synth_months)
        spec = replace(spec, months=cfg.synth_months, start=start)
    panel, truth = generate(spec)
    paths = write_economy(out, panel, truth)
    cfg_text = config_text(
        replace(
            cfg,
            monetary_path=str(out / "monetary.csv"),
            cpi_path=str(out / "cpi.csv"),
        )
    )
    config_path = out / "synthetic_config.txt"
    config_path.write_text(cfg_text, encoding="utf-8")
    return [paths["monetary"], paths["cpi"], paths["ground_truth"], config_path]


def cmd_report(cfg: RunConfig) -> list[Path]:
    out = _out(cfg)
    needed = {
        "tanh_fit.csv": "fit-phase",
        "breakpoints.csv": "breakpoints",
        "efficiency.csv": "efficiency",
        "critical_point_summary.csv": "calibrate",
    }
    missing = [name for name in needed if not (out / name).exists()]
    if missing:
        raise DataError(
            "missing upstream outputs: " + ", ".join(sorted(missing))
        )

    lines = []
    _, _, tanh_rows = read_csv(out / "tanh_fit.csv")
    lines.append(f"tanh.phi0 = {tanh_rows[0][0]}")
    lines.append(f"tanh.A = {tanh_rows[0][1]}")
    lines.append(f"tanh.t0_calendar = {tanh_rows[0][2]}")
    lines.append(f"tanh.w_months = {tanh_rows[0][3]}")

    _, _, break_rows = read_csv(out / "breakpoints.csv")
    by_key: dict[tuple[str, str], list[int]] = {}
    for cells in break_rows:
        series, cluster, tau = cells[0], cells[1], cells[4]
        by_key.setdefault((series, cluster), []).append(MonthIndex.parse(tau).ordinal)
    for (series, cluster), taus in sorted(by_key.items()):
        taus.sort()
        median = MonthIndex.from_ordinal(taus[(len(taus) - 1) // 2])
        lines.append(f"breakpoints.{cluster}.{series}.median = {median}")

    _, _, eff_rows = read_csv(out / "efficiency.csv")
    for cells in eff_rows:
        label = cells[0]
        lines.append(f"efficiency.{label}.eff_r = {cells[1]}")
        lines.append(f"efficiency.{label}.argmax_r = {cells[2]}")
        lines.append(f"efficiency.{label}.eff_c = {cells[3]}")
        lines.append(f"efficiency.{label}.argmax_c = {cells[4]}")

    preamble, _, crit_rows = read_csv(out / "critical_point_summary.csv")
    lines.append(f"calibration.phi_c = {crit_rows[0][0]}")
    lines.append(f"calibration.s_pi = {crit_rows[0][1]}")
    lines.append(f"calibration.objective = {crit_rows[0][4]}")
    lines.append(f"calibration.ordering_holds = {preamble.get('ordering_holds', '')}")

    path = out / "report.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [path]
