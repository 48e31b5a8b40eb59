"""Run configuration: flat dotted keys in a plain text file plus overrides.

Every default equals the baseline specification, so a bare run with only
the two data paths reproduces the headline setup: thresholds 0.30/0.60,
AR(12) shocks, horizon 24, 12 lags, HAC lag 12, tanh window 2010-01 to
2018-12, and the standard breakpoint window clusters.

File format: one ``key = value`` per line, ``#`` comments allowed.
Window lists are comma-separated ``start:end`` month ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import DataError
from .series import MonthIndex

# Nested window clusters around the three candidate regime changes. The
# outermost windows span roughly 1983-1997, 2008-2019, and 2018-2025;
# each cluster tightens in steps while keeping at least 49 months so a
# 24-month minimum segment fits on both sides.
DEFAULT_CLUSTERS: tuple[tuple[str, tuple[tuple[str, str], ...]], ...] = (
    (
        "1990",
        (
            ("1983-01", "1997-12"),
            ("1984-01", "1996-12"),
            ("1985-01", "1995-12"),
            ("1986-01", "1994-12"),
            ("1987-01", "1993-12"),
        ),
    ),
    (
        "2013",
        (
            ("2008-01", "2019-12"),
            ("2009-01", "2018-12"),
            ("2010-01", "2017-12"),
            ("2010-07", "2017-06"),
            ("2011-01", "2016-12"),
        ),
    ),
    (
        "2022",
        (
            ("2018-01", "2025-12"),
            ("2018-07", "2025-06"),
            ("2019-01", "2024-12"),
            ("2019-07", "2024-06"),
            ("2020-01", "2024-12"),
        ),
    ),
)

ERA_BOUNDS = (
    ("1971-1989", 1989),
    ("1990-2012", 2012),
    ("2013-2021", 2021),
    ("2022-2026", 9999),
)

SHOCK_KINDS = ("ar_resid", "detrended")


def _parse_window(text: str) -> tuple[MonthIndex, MonthIndex]:
    a, sep, b = text.partition(":")
    if not sep:
        raise DataError(f"window {text!r} must look like YYYY-MM:YYYY-MM")
    return MonthIndex.parse(a), MonthIndex.parse(b)


@dataclass(frozen=True)
class RunConfig:
    monetary_path: str = ""
    cpi_path: str = ""
    out_dir: str = "out"
    cash_max: float = 0.30
    reserve_min: float = 0.60
    tanh_start: MonthIndex = MonthIndex(2010, 1)
    tanh_end: MonthIndex = MonthIndex(2018, 12)
    shock_kind: str = "ar_resid"
    shock_p: int = 12
    horizon: int = 24
    lags: int = 12
    hac_lag: int = 12
    min_segment: int = 24
    robustness: bool = False
    intermediate_diagnostic: bool = True
    landau_phi_c: float | None = None
    synth_months: int = 612
    seed: int = 1
    clusters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.clusters:
            object.__setattr__(
                self,
                "clusters",
                {
                    name: [
                        (MonthIndex.parse(a), MonthIndex.parse(b)) for a, b in windows
                    ]
                    for name, windows in DEFAULT_CLUSTERS
                },
            )
        if self.shock_kind not in SHOCK_KINDS:
            raise DataError(
                f"shock kind must be one of {SHOCK_KINDS}, got {self.shock_kind!r}"
            )
        if not 0.0 < self.cash_max < self.reserve_min < 1.0:
            raise DataError("thresholds must satisfy 0 < cash_max < reserve_min < 1")
        for name, value in (
            ("shock.p", self.shock_p),
            ("lp.horizon", self.horizon),
            ("lp.lags", self.lags),
            ("lp.hac_lag", self.hac_lag),
            ("breaks.min_segment", self.min_segment),
        ):
            if value < 0 or (name in ("shock.p",) and value < 1):
                raise DataError(f"{name} must be positive, got {value}")


_SCALAR_KEYS = {
    "data.monetary": ("monetary_path", str),
    "data.cpi": ("cpi_path", str),
    "out.dir": ("out_dir", str),
    "phase.cash_max": ("cash_max", float),
    "phase.reserve_min": ("reserve_min", float),
    "tanh.window_start": ("tanh_start", MonthIndex.parse),
    "tanh.window_end": ("tanh_end", MonthIndex.parse),
    "shock.kind": ("shock_kind", str),
    "shock.p": ("shock_p", int),
    "lp.horizon": ("horizon", int),
    "lp.lags": ("lags", int),
    "lp.hac_lag": ("hac_lag", int),
    "breaks.min_segment": ("min_segment", int),
    "irf.robustness": ("robustness", lambda v: v.lower() in ("1", "true", "yes")),
    "irf.intermediate_diagnostic": (
        "intermediate_diagnostic",
        lambda v: v.lower() in ("1", "true", "yes"),
    ),
    "landau.phi_c": ("landau_phi_c", float),
    "synth.months": ("synth_months", int),
    "seed": ("seed", int),
}


def _apply_key(values: dict, clusters: dict, key: str, raw: str):
    if key.startswith("breaks.cluster."):
        name = key[len("breaks.cluster.") :]
        if not name:
            raise DataError("cluster key needs a name: breaks.cluster.<name>")
        clusters[name] = [_parse_window(w.strip()) for w in raw.split(",") if w.strip()]
        return
    if key not in _SCALAR_KEYS:
        raise DataError(f"unknown configuration key {key!r}")
    attr, convert = _SCALAR_KEYS[key]
    try:
        values[attr] = convert(raw)
    except DataError:
        raise
    except ValueError:
        raise DataError(f"cannot parse value {raw!r} for key {key!r}") from None


def parse_config(path: Path | str) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    values: dict = {}
    clusters: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"{path.name}:{lineno}: expected 'key = value'")
        _apply_key(values, clusters, key.strip(), value.strip())
    if clusters:
        values["clusters"] = clusters
    return RunConfig(**values)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply repeated 'key=value' strings on top of a parsed config."""
    values: dict = {}
    clusters = dict(cfg.clusters)
    for text in overrides:
        key, sep, value = text.partition("=")
        if not sep:
            raise DataError(f"override {text!r} must look like key=value")
        _apply_key(values, clusters, key.strip(), value.strip())
    values["clusters"] = clusters
    return replace(cfg, **values)


def config_text(cfg: RunConfig) -> str:
    """Serialize back to the flat key format (used by the synth command)."""
    lines = [
        f"data.monetary = {cfg.monetary_path}",
        f"data.cpi = {cfg.cpi_path}",
        f"out.dir = {cfg.out_dir}",
        f"phase.cash_max = {cfg.cash_max!r}",
        f"phase.reserve_min = {cfg.reserve_min!r}",
        f"tanh.window_start = {cfg.tanh_start}",
        f"tanh.window_end = {cfg.tanh_end}",
        f"shock.kind = {cfg.shock_kind}",
        f"shock.p = {cfg.shock_p}",
        f"lp.horizon = {cfg.horizon}",
        f"lp.lags = {cfg.lags}",
        f"lp.hac_lag = {cfg.hac_lag}",
        f"breaks.min_segment = {cfg.min_segment}",
        f"irf.robustness = {'true' if cfg.robustness else 'false'}",
        f"seed = {cfg.seed}",
    ]
    for name, windows in cfg.clusters.items():
        body = ",".join(f"{a}:{b}" for a, b in windows)
        lines.append(f"breaks.cluster.{name} = {body}")
    return "\n".join(lines) + "\n"


def era_label(year: int) -> str:
    for label, last in ERA_BOUNDS:
        if year <= last:
            return label
    return ERA_BOUNDS[-1][0]
