"""Experiment orchestration: config parsing, sweeps, and table emission.

The sweep runner evaluates each requested metric on a grid of average
SNR values and element counts, producing one row per (gamma_bar, N,
metric) with the closed-form value and, where requested, the high-SNR
asymptote, a Monte Carlo estimate, and an independent quadrature oracle.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Tuple

from . import analytic, montecarlo
from .channel import LinkConfig, PointingGeometry, TurbulenceParams
from .errors import ConfigError, DegenerateParametersError, DomainError, RisFsoError

__all__ = [
    "ChannelVariant",
    "SweepSpec",
    "Row",
    "Table",
    "validate_config",
    "figure_preset",
    "run_sweep",
    "emit",
    "main",
    "CSV_COLUMNS",
    "PRESET_IDS",
]

CSV_COLUMNS = (
    "gamma_bar_db",
    "n_elements",
    "metric",
    "analytic",
    "asymptotic",
    "mc_mean",
    "mc_stderr",
    "oracle",
    "n_samples",
    "seed",
)

METRICS = ("outage", "ber", "capacity", "af", "moments")
PRESET_IDS = ("fig2", "fig3", "fig4", "fig5")
WORKERS_ENV = "RISFSO_WORKERS"

# Baseline parameter set used whenever a value is not supplied:
# sigma_theta = 1 mrad, sigma_beta = 0.5 mrad, beam width 120 cm,
# aperture radius 10 cm, alpha = 15, beta = 10, L1 = L2 = 150 m.
DEFAULTS = {
    "turbulence.alpha": 15.0,
    "turbulence.beta": 10.0,
    "pointing.sigma_theta_mrad": 1.0,
    "pointing.sigma_beta_mrad": 0.5,
    "pointing.beam_width_cm": 120.0,
    "pointing.aperture_radius_cm": 10.0,
    "pointing.l1_m": 150.0,
    "pointing.l2_m": 150.0,
    "link.gamma_bar_db": "0:40:2",
    "link.n_elements": "128",
    "link.gamma_th_db": 0.0,
    "link.psi": 1.0,
    "sweep.metrics": "outage,ber,capacity",
    "sweep.include_asymptotic": False,
    "sweep.include_oracle": False,
    "sweep.include_mc": True,
    "mc.samples": 100000,
    "mc.seed": 2024,
    "mc.workers": 0,  # 0 -> env var or 1
}

_OPTIONAL_KEYS = {
    "turbulence.cn2",
    "turbulence.wavelength_nm",
    "pointing.exponent_c",
}

_POSITIVE_UNIT_KEYS = {
    "pointing.sigma_theta_mrad": False,  # may be zero
    "pointing.sigma_beta_mrad": False,
    "pointing.beam_width_cm": True,
    "pointing.aperture_radius_cm": True,
    "pointing.l2_m": True,
    "turbulence.alpha": True,
    "turbulence.beta": True,
    "turbulence.cn2": True,
    "turbulence.wavelength_nm": True,
    "link.psi": True,
    "pointing.exponent_c": True,
}


@dataclass(frozen=True)
class ChannelVariant:
    """A labelled (turbulence, pointing) channel used by one sweep."""

    label: str
    turbulence: TurbulenceParams
    pointing: PointingGeometry
    n_list: Tuple[int, ...]


@dataclass
class SweepSpec:
    """Fully-resolved sweep description."""

    gamma_bar_db: Tuple[float, ...]
    metrics: Tuple[str, ...]
    variants: Tuple[ChannelVariant, ...]
    gamma_th: float = 1.0
    psi: float = 1.0
    mc_samples: int = 100000
    seed: int = 2024
    workers: int = 1
    include_asymptotic: bool = False
    include_oracle: bool = False
    include_mc: bool = True

    def resolved(self) -> dict:
        """JSON-serializable echo of every parameter driving the sweep."""
        return {
            "gamma_bar_db": list(self.gamma_bar_db),
            "metrics": list(self.metrics),
            "gamma_th": self.gamma_th,
            "psi": self.psi,
            "mc_samples": self.mc_samples,
            "seed": self.seed,
            "workers": self.workers,
            "include_asymptotic": self.include_asymptotic,
            "include_oracle": self.include_oracle,
            "include_mc": self.include_mc,
            "variants": [
                {
                    "label": v.label,
                    "n_list": list(v.n_list),
                    "alpha": v.turbulence.alpha,
                    "beta": v.turbulence.beta,
                    "sigma_theta_rad": v.pointing.sigma_theta,
                    "sigma_beta_rad": v.pointing.sigma_beta,
                    "l1_m": v.pointing.distance_l1,
                    "l2_m": v.pointing.distance_l2,
                    "beam_width_m": v.pointing.beam_width,
                    "aperture_radius_m": v.pointing.aperture_radius,
                    "a0": v.pointing.a0,
                    "c": v.pointing.c,
                }
                for v in self.variants
            ],
        }


@dataclass
class Row:
    gamma_bar_db: float
    n_elements: int
    metric: str
    analytic: Optional[float] = None
    asymptotic: Optional[float] = None
    mc_mean: Optional[float] = None
    mc_stderr: Optional[float] = None
    oracle: Optional[float] = None
    n_samples: Optional[int] = None
    seed: Optional[int] = None
    clamp_events: int = 0
    error: Optional[str] = None


@dataclass
class Table:
    rows: List[Row]
    config: dict


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    low = text.strip().lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    return text.strip()


def _parse_grid(text, lineno: int, errors: List[str], key: str) -> List[float]:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return [float(text)]
    text = str(text)
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ValueError
            out, v = [], start
            while v <= stop + 1e-9:
                out.append(round(v, 12))
                v += step
        else:
            out = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        errors.append(f"line {lineno}: {key}: cannot parse grid {text!r}")
        return []
    if not out:
        errors.append(f"line {lineno}: {key}: grid is empty")
    elif any(b <= a for a, b in zip(out, out[1:])):
        errors.append(f"line {lineno}: {key}: grid must be strictly increasing")
    return out


def _read_config(path: str) -> Dict[str, Tuple[object, int]]:
    entries: Dict[str, Tuple[object, int]] = {}
    errors: List[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS and key not in _OPTIONAL_KEYS:
                errors.append(f"line {lineno}: unknown key {key!r}")
                continue
            entries[key] = (_parse_scalar(value), lineno)
    if errors:
        raise ConfigError(errors)
    return entries


def validate_config(path: str) -> SweepSpec:
    """Parse and validate a sweep config, applying baseline defaults."""
    entries = _read_config(path)
    errors: List[str] = []

    def get(key):
        if key in entries:
            return entries[key]
        return (DEFAULTS.get(key), 0)

    for key, strictly in _POSITIVE_UNIT_KEYS.items():
        if key not in entries and key not in DEFAULTS:
            continue
        val, lineno = get(key)
        if val is None:
            continue
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            errors.append(f"line {lineno}: {key}: expected a number, got {val!r}")
        elif (strictly and not val > 0) or val < 0:
            errors.append(f"line {lineno}: {key}: unit violation, must be "
                          f"{'positive' if strictly else 'non-negative'} (got {val})")

    for key in ("pointing.l1_m",):
        val, lineno = get(key)
        if not isinstance(val, (int, float)) or val < 0:
            errors.append(f"line {lineno}: {key}: must be a non-negative number")

    gamma_grid = _parse_grid(*get("link.gamma_bar_db"), errors=errors, key="link.gamma_bar_db")
    n_raw, n_line = get("link.n_elements")
    n_list: List[int] = []
    for part in str(n_raw).split(","):
        try:
            n = int(part)
            if n < 1:
                raise ValueError
            n_list.append(n)
        except ValueError:
            errors.append(f"line {n_line}: link.n_elements: bad element count {part!r}")
    if n_list and any(b <= a for a, b in zip(n_list, n_list[1:])):
        errors.append(f"line {n_line}: link.n_elements: list must be strictly increasing")

    metrics_raw, m_line = get("sweep.metrics")
    metrics = tuple(p.strip() for p in str(metrics_raw).split(",") if p.strip())
    for m in metrics:
        if m not in METRICS:
            errors.append(f"line {m_line}: sweep.metrics: unknown metric {m!r}")

    include_mc = bool(get("sweep.include_mc")[0])
    mc_samples, mc_line = get("mc.samples")
    if not isinstance(mc_samples, int) or isinstance(mc_samples, bool):
        errors.append(f"line {mc_line}: mc.samples: expected an integer")
    elif include_mc and mc_samples < 1000:
        errors.append(f"line {mc_line}: mc.samples: must be >= 1000 when MC is enabled")

    if errors:
        raise ConfigError(errors)

    alpha = float(get("turbulence.alpha")[0])
    beta = float(get("turbulence.beta")[0])
    turb = TurbulenceParams(alpha=alpha, beta=beta)

    wz = float(get("pointing.beam_width_cm")[0]) / 100.0
    ap = float(get("pointing.aperture_radius_cm")[0]) / 100.0
    l2 = float(get("pointing.l2_m")[0])
    c_override = entries.get("pointing.exponent_c")
    if c_override is not None:
        pointing = PointingGeometry.from_exponent(float(c_override[0]), wz, ap, l2)
    else:
        pointing = PointingGeometry(
            sigma_theta=float(get("pointing.sigma_theta_mrad")[0]) * 1e-3,
            sigma_beta=float(get("pointing.sigma_beta_mrad")[0]) * 1e-3,
            distance_l1=float(get("pointing.l1_m")[0]),
            distance_l2=l2,
            beam_width=wz,
            aperture_radius=ap,
        )

    workers = int(get("mc.workers")[0]) or int(os.environ.get(WORKERS_ENV, "1"))
    variant = ChannelVariant("", turb, pointing, tuple(n_list))
    return SweepSpec(
        gamma_bar_db=tuple(gamma_grid),
        metrics=metrics,
        variants=(variant,),
        gamma_th=LinkConfig.db_to_linear(float(get("link.gamma_th_db")[0])),
        psi=float(get("link.psi")[0]),
        mc_samples=int(mc_samples),
        seed=int(get("mc.seed")[0]),
        workers=workers,
        include_asymptotic=bool(get("sweep.include_asymptotic")[0]),
        include_oracle=bool(get("sweep.include_oracle")[0]),
        include_mc=include_mc,
    )


def _default_pointing(**overrides) -> PointingGeometry:
    kw = dict(
        sigma_theta=1e-3,
        sigma_beta=0.5e-3,
        distance_l1=150.0,
        distance_l2=150.0,
        beam_width=1.2,
        aperture_radius=0.1,
    )
    kw.update(overrides)
    return PointingGeometry(**kw)


def figure_preset(preset_id: str, mc_samples: int = 10000, seed: int = 2024,
                  workers: int = 1) -> SweepSpec:
    """Parameter sets behind the published capacity/outage/BER sweeps."""
    turb_default = TurbulenceParams(alpha=15.0, beta=10.0)
    common = dict(mc_samples=mc_samples, seed=seed, workers=workers)
    grid = tuple(float(v) for v in range(0, 42, 2))

    if preset_id == "fig2":
        # Capacity vs average SNR for a range of element counts, plus the
        # no-reflector direct link baseline (single 100 m path, transmitter
        # jitter only).
        direct = PointingGeometry(
            sigma_theta=1e-3, sigma_beta=0.0, distance_l1=0.0,
            distance_l2=100.0, beam_width=1.2, aperture_radius=0.1,
        )
        return SweepSpec(
            gamma_bar_db=grid,
            metrics=("capacity",),
            variants=(
                ChannelVariant("", turb_default, _default_pointing(), (1, 16, 64, 128, 256)),
                ChannelVariant("direct", turb_default, direct, (1,)),
            ),
            **common,
        )
    if preset_id == "fig3":
        # Outage at N = 128 for several beam-width / aperture ratios.
        variants = tuple(
            ChannelVariant(
                f"wz{int(wz * 100)}_a{int(ap * 100)}",
                turb_default,
                _default_pointing(beam_width=wz, aperture_radius=ap),
                (128,),
            )
            for wz, ap in ((1.2, 0.1), (0.8, 0.1), (1.2, 0.2))
        )
        return SweepSpec(gamma_bar_db=grid, metrics=("outage",), variants=variants, **common)
    if preset_id == "fig4":
        # Asymptotic outage: alpha = 6.5, beta = 6.0, heavy jitter with
        # pointing exponent c = 0.5, small element counts.
        turb = TurbulenceParams(alpha=6.5, beta=6.0)
        pointing = PointingGeometry.from_exponent(0.5, 1.2, 0.1, 150.0)
        return SweepSpec(
            gamma_bar_db=tuple(float(v) for v in range(0, 85, 5)),
            metrics=("outage",),
            variants=(ChannelVariant("", turb, pointing, (1, 2, 4)),),
            include_asymptotic=True,
            **common,
        )
    if preset_id == "fig5":
        # BER at N = 128, L1 = 350 m, L2 = 250 m, 20 cm aperture, for
        # turbulence-strength and transmitter-jitter variants.
        geo = dict(distance_l1=350.0, distance_l2=250.0, aperture_radius=0.2)
        variants = (
            ChannelVariant(
                "a15_b10_s1", turb_default,
                _default_pointing(sigma_theta=1e-3, **geo), (128,),
            ),
            ChannelVariant(
                "a15_b10_s2", turb_default,
                _default_pointing(sigma_theta=2e-3, **geo), (128,),
            ),
            ChannelVariant(
                "a6.5_b6_s1", TurbulenceParams(alpha=6.5, beta=6.0),
                _default_pointing(sigma_theta=1e-3, **geo), (128,),
            ),
        )
        return SweepSpec(gamma_bar_db=grid, metrics=("ber",), variants=variants, **common)
    raise DomainError(f"unknown preset {preset_id!r}; choose from {PRESET_IDS}")


_MC_KIND = {"outage": "outage", "ber": "ber", "capacity": "capacity", "moments": "moment"}
_ORACLE_KIND = {"outage": "outage", "ber": "ber_exactQ", "capacity": "capacity",
                "moments": "moment"}


def _metric_label(metric: str, label: str) -> str:
    return f"{metric}@{label}" if label else metric


def run_sweep(spec: SweepSpec) -> Table:
    """Evaluate every (gamma_bar, N, metric) cell of the sweep."""
    rows: List[Row] = []
    gammas = [LinkConfig.db_to_linear(db) for db in spec.gamma_bar_db]

    for variant in spec.variants:
        t, g = variant.turbulence, variant.pointing
        for n in variant.n_list:
            ms = analytic.moments(t, g, n)
            base_cfg = LinkConfig(n_elements=n, gamma_bar=1.0,
                                  gamma_th=spec.gamma_th, psi=spec.psi)
            profile = None
            profile_error = None
            if spec.include_asymptotic and "outage" in spec.metrics:
                try:
                    profile = analytic.asymptotic_profile(t, g, n)
                except DegenerateParametersError as exc:
                    profile_error = str(exc)

            mc_by_metric: Dict[str, Dict[float, montecarlo.McEstimate]] = {}
            if spec.include_mc:
                for metric in spec.metrics:
                    kind = _MC_KIND.get(metric)
                    if kind is None:
                        continue
                    mc_by_metric[metric] = montecarlo.estimate_grid(
                        kind, t, g, base_cfg, gammas, spec.mc_samples,
                        spec.seed, spec.workers,
                    )

            for db, gb in zip(spec.gamma_bar_db, gammas):
                for metric in spec.metrics:
                    row = Row(
                        gamma_bar_db=db,
                        n_elements=n,
                        metric=_metric_label(metric, variant.label),
                        seed=spec.seed if spec.include_mc else None,
                    )
                    with analytic.track_clamps() as clamps:
                        try:
                            row.analytic = _analytic_value(metric, ms, gb, spec)
                        except RisFsoError as exc:
                            row.error = str(exc)
                        if metric == "outage" and spec.include_asymptotic:
                            if profile is not None:
                                row.asymptotic = analytic.asymptotic_outage(
                                    spec.gamma_th, profile, t, g, gb
                                )
                            else:
                                row.error = profile_error
                    row.clamp_events = len(clamps)
                    if spec.include_oracle:
                        kind = _ORACLE_KIND.get(metric)
                        if kind is not None:
                            row.oracle = _oracle_value(metric, kind, ms, gb, spec)
                    est = mc_by_metric.get(metric, {}).get(gb)
                    if est is not None:
                        row.mc_mean = est.mean
                        row.mc_stderr = est.stderr
                        row.n_samples = est.n_samples
                    rows.append(row)
    return Table(rows=rows, config=spec.resolved())


def _analytic_value(metric: str, ms, gamma_bar: float, spec: SweepSpec) -> float:
    if metric == "outage":
        return analytic.outage_probability(spec.gamma_th, ms, gamma_bar)
    if metric == "ber":
        return analytic.average_ber(spec.psi, ms, gamma_bar)
    if metric == "capacity":
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return analytic.channel_capacity(ms, gamma_bar)
    if metric == "af":
        return analytic.amount_of_fading(2, ms, gamma_bar)
    if metric == "moments":
        return analytic.generalized_moment(1, ms, gamma_bar)
    raise DomainError(f"unknown metric {metric!r}")


def _oracle_value(metric: str, kind: str, ms, gamma_bar: float, spec: SweepSpec) -> float:
    if metric == "af":
        m2, _ = analytic.oracle_metric("moment", ms, gamma_bar, n=2)
        m1, _ = analytic.oracle_metric("moment", ms, gamma_bar, n=1)
        return m2 / m1 ** 2 - 1.0
    value, _ = analytic.oracle_metric(
        kind, ms, gamma_bar, gamma_th=spec.gamma_th, psi=spec.psi, n=1
    )
    return value


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(table: Table, fmt: str, path: Optional[str] = None) -> str:
    """Serialize the table; CSV columns follow the fixed contract."""
    if not table.rows:
        raise DomainError("table is empty")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in table.rows:
            writer.writerow([_format_cell(getattr(row, col)) for col in CSV_COLUMNS])
        payload = buf.getvalue()
    elif fmt == "json":
        payload = json.dumps(
            {"config": table.config, "rows": [asdict(r) for r in table.rows]},
            indent=2,
            sort_keys=True,
        ) + "\n"
    else:
        raise DomainError(f"unknown format {fmt!r}; choose csv or json")
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
    return payload


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="risfso",
        description="Performance sweeps for reflecting-surface-aided FSO links",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a sweep from a config file")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")

    p_fig = sub.add_parser("figure", help="run a published-figure preset")
    p_fig.add_argument("preset", choices=PRESET_IDS)
    p_fig.add_argument("--mc-samples", type=int, default=10000)
    p_fig.add_argument("--seed", type=int, default=2024)
    p_fig.add_argument("--workers", type=int, default=None)
    p_fig.add_argument("--out", default=None)
    p_fig.add_argument("--format", choices=("csv", "json"), default="csv")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("--config", required=True)

    args = parser.parse_args(argv)
    env_workers = int(os.environ.get(WORKERS_ENV, "1"))

    if args.command == "validate":
        try:
            spec = validate_config(args.config)
        except ConfigError as exc:
            for item in exc.items:
                print(f"error: {item}", file=sys.stderr)
            return 2
        print(json.dumps(spec.resolved(), indent=2, sort_keys=True))
        return 0

    try:
        if args.command == "sweep":
            spec = validate_config(args.config)
            if args.seed is not None:
                spec.seed = args.seed
            if args.workers is not None:
                spec.workers = args.workers
            elif spec.workers == 1 and env_workers > 1:
                spec.workers = env_workers
        else:
            workers = args.workers if args.workers is not None else env_workers
            spec = figure_preset(args.preset, mc_samples=args.mc_samples,
                                 seed=args.seed, workers=workers)
    except ConfigError as exc:
        for item in exc.items:
            print(f"error: {item}", file=sys.stderr)
        return 2

    table = run_sweep(spec)
    payload = emit(table, args.format, args.out)
    if not args.out:
        sys.stdout.write(payload)
    else:
        print(f"wrote {len(table.rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
