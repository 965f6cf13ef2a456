"""Batch front end: parse a config, run one experiment, emit artifacts.

Config files are line oriented, UTF-8, one ``section.key = value`` per
line; blank lines and lines starting with ``#`` are skipped.  Sections:

    run.mode      one of the nine experiment modes (the CLI positional
                  argument wins if the two disagree)
    model.*       kind, rate/burst families and their coefficients
    numeric.*     per-mode knobs (budgets, tolerances, seed, stream)
    output.dir    artifact directory

Model keys:

    model.kind  = discrete | continuous
    model.decay = <float>                     first-order decay coefficient
    model.rate  = constant | linear | quadratic | hill | truncated-linear
        constant:         rate_level
        linear:           rate_base rate_slope
        quadratic:        rate_base rate_slope rate_quad
        hill:             rate_scale rate_numer rate_denom_const
                          rate_denom_coeff rate_exponent
        truncated-linear: rate_base rate_slope rate_cutoff   (discrete only)
    model.burst = geometric | exponential | power-tail | gaussian-exp
                  | finite-support
        geometric:      burst_b          (discrete)
        exponential:    burst_b          (continuous)
        power-tail:     burst_offset burst_exponent
        gaussian-exp:   burst_lin burst_quad
        finite-support: burst_cap burst_exponent

Parsing resolves every optional numeric key to its default, so a parsed
config is fully explicit; render_config writes that canonical form and
parse(render(parse(text))) == parse(text).

Exit codes: 0 success, 1 config problem (parse or validation), 2
numeric failure (non-normalizable model, no convergence, and kin).
Runs are reproducible: rerunning the same config and seed rewrites
byte-identical CSV artifacts.  ``--sweep section.key=start:stop:count``
fans one scalar across a range in a worker pool (capped by the
BURSTKIN_THREADS environment variable), one artifact directory and one
summary row per point; points that fail are classified in their row
rather than aborting the sweep.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import continuous as cont
from . import discrete as disc
from .errors import (
    ConfigError,
    NumericError,
    ParseError,
    ValidationError,
)
from .models import (
    ConstantRate,
    ContinuousBurstModel,
    DiscreteBurstModel,
    ExponentialBurstKernel,
    FiniteSupportNu,
    GaussianExpNu,
    GeometricBurst,
    HillRate,
    LinearDecay,
    LinearRate,
    ModelError,
    PowerTailNu,
    QuadraticRate,
    SeparableBurstKernel,
    TruncatedLinearRate,
)
from .numerics import StepperConfig, tv_distance
from .serialize import (
    format_float,
    write_density_csv,
    write_modes_csv,
    write_pairs_csv,
    write_pmf_csv,
    write_trace_csv,
    write_trajectory_csv,
)

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "parse_config",
    "render_config",
    "run_experiment",
    "run_sweep",
    "main",
]

MODES = (
    "stationary-discrete",
    "stationary-continuous",
    "evolve-master",
    "simulate-discrete",
    "simulate-pdmp",
    "kernel-fixed-point",
    "invert-phi",
    "modes",
    "ergodicity",
)

# model kind each mode operates on; None means either
_MODE_KIND = {
    "stationary-discrete": "discrete",
    "evolve-master": "discrete",
    "simulate-discrete": "discrete",
    "stationary-continuous": "continuous",
    "simulate-pdmp": "continuous",
    "kernel-fixed-point": "continuous",
    "invert-phi": "continuous",
    "ergodicity": "continuous",
    "modes": None,
}

_RATE_KEYS = {
    "constant": ("rate_level",),
    "linear": ("rate_base", "rate_slope"),
    "quadratic": ("rate_base", "rate_slope", "rate_quad"),
    "hill": ("rate_scale", "rate_numer", "rate_denom_const",
             "rate_denom_coeff", "rate_exponent"),
    "truncated-linear": ("rate_base", "rate_slope", "rate_cutoff"),
}

_BURST_KEYS = {
    "geometric": ("burst_b",),
    "exponential": ("burst_b",),
    "power-tail": ("burst_offset", "burst_exponent"),
    "gaussian-exp": ("burst_lin", "burst_quad"),
    "finite-support": ("burst_cap", "burst_exponent"),
}

_DISCRETE_BURSTS = {"geometric"}
_CONTINUOUS_BURSTS = {"exponential", "power-tail", "gaussian-exp", "finite-support"}

# numeric schema per mode: key -> (type, required, default)
_COMMON_NUMERIC = {
    "seed": (int, False, 0),
    "stream": (int, False, 0),
}
_MODE_NUMERIC = {
    "stationary-discrete": {
        "n_max": (int, True, None),
        "tail_tol": (float, False, 1e-8),   # <= 0 disables the tail check
    },
    "stationary-continuous": {
        "n_knots": (int, False, 1024),
        "x_ref": (float, False, 1.0),
    },
    "evolve-master": {
        "n_max": (int, True, None),
        "t_end": (float, True, None),
        "n0": (int, False, 0),
        "n_snapshots": (int, False, 25),
        "rel_tol": (float, False, 1e-8),
        "abs_tol": (float, False, 1e-11),
    },
    "simulate-discrete": {
        "n0": (int, True, None),
        "n_jumps": (int, True, None),
    },
    "simulate-pdmp": {
        "y0": (float, True, None),
        "n_jumps": (int, True, None),
        "x_ref": (float, False, 1.0),
        "n_bins": (int, False, 64),
    },
    "kernel-fixed-point": {
        "n_knots": (int, False, 4096),
        "x_ref": (float, False, 1.0),
        "tol": (float, False, 1e-10),
        "max_iter": (int, False, 5000),
        "leak_tol": (float, False, 2e-5),
    },
    "invert-phi": {
        "n_knots": (int, False, 1024),
        "x_ref": (float, False, 1.0),
        "floor": (float, False, 1e-12),
    },
    "modes": {
        "n_max": (int, False, 512),          # discrete scan span
        "window_lo": (float, False, 0.0),    # 0 means auto (continuous)
        "window_hi": (float, False, 0.0),
        "n_scan": (int, False, 2048),
    },
    "ergodicity": {
        "y_probe": (float, True, None),
        "n_probes": (int, False, 8),
        "quad_tol": (float, False, 1e-10),
    },
}

# canonical key order for rendering
_NUMERIC_ORDER = (
    "n_max", "t_end", "n0", "y0", "n_jumps", "n_snapshots", "n_knots",
    "n_bins", "n_scan", "n_probes", "max_iter", "x_ref", "y_probe",
    "window_lo", "window_hi", "tail_tol", "tol", "leak_tol", "quad_tol",
    "rel_tol", "abs_tol", "floor", "seed", "stream",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully resolved experiment: mode, model block, numeric block."""

    mode: str
    model: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=dict)
    out_dir: str = "out"

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return (self.mode == other.mode and self.model == other.model
                and self.numeric == other.numeric and self.out_dir == other.out_dir)

    def build_model(self):
        m = self.model
        rate = _build_rate(m)
        decay = LinearDecay(m["decay"])
        if m["kind"] == "discrete":
            return DiscreteBurstModel(rate, decay, GeometricBurst(m["burst_b"]))
        return ContinuousBurstModel(rate, decay, _build_kernel(m))


def _build_rate(m: dict):
    kind = m["rate"]
    if kind == "constant":
        return ConstantRate(m["rate_level"])
    if kind == "linear":
        return LinearRate(m["rate_base"], m["rate_slope"])
    if kind == "quadratic":
        return QuadraticRate(m["rate_base"], m["rate_slope"], m["rate_quad"])
    if kind == "hill":
        return HillRate(m["rate_scale"], m["rate_numer"], m["rate_denom_const"],
                        m["rate_denom_coeff"], m["rate_exponent"])
    return TruncatedLinearRate(m["rate_base"], m["rate_slope"], m["rate_cutoff"])


def _build_kernel(m: dict):
    kind = m["burst"]
    if kind == "exponential":
        return ExponentialBurstKernel(m["burst_b"])
    if kind == "power-tail":
        return SeparableBurstKernel(PowerTailNu(m["burst_offset"], m["burst_exponent"]))
    if kind == "gaussian-exp":
        return SeparableBurstKernel(GaussianExpNu(m["burst_lin"], m["burst_quad"]))
    return SeparableBurstKernel(FiniteSupportNu(m["burst_cap"], m["burst_exponent"]))


# ---------------------------------------------------------------------------
# parsing and rendering
# ---------------------------------------------------------------------------

def _split_lines(text: str) -> dict:
    """First pass: raw (section, key) -> (value string, line number)."""
    entries: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'section.key = value'")
        left, _, value = line.partition("=")
        left = left.strip()
        value = value.strip()
        if "." not in left:
            raise ParseError(f"line {lineno}: key must look like 'section.key'")
        section, _, key = left.partition(".")
        section = section.strip()
        key = key.strip()
        if not section or not key or not value:
            raise ParseError(f"line {lineno}: empty section, key, or value")
        if (section, key) in entries:
            raise ParseError(f"line {lineno}: duplicate key {section}.{key}")
        entries[(section, key)] = (value, lineno)
    return entries


def _where(lineno) -> str:
    return f"line {lineno}: " if lineno is not None else ""


def _as_float(value: str, name: str, lineno) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ValidationError(f"{_where(lineno)}{name} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ValidationError(f"{_where(lineno)}{name} must be finite, got {value!r}")
    return out


def _as_int(value: str, name: str, lineno) -> int:
    try:
        return int(value, 10)
    except ValueError:
        raise ValidationError(f"{_where(lineno)}{name} must be an integer, got {value!r}") from None


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate a config, resolving every default.

    ``overrides`` maps (section, key) to replacement value strings; the
    command line uses it for the positional mode and the --seed/--out
    flags, so the rendered canonical config reflects what actually ran.
    """
    entries = _split_lines(text)
    if overrides:
        for sk, value in overrides.items():
            entries[sk] = (str(value), None)

    known_sections = {"run", "model", "numeric", "output"}
    for (section, key), (_, lineno) in entries.items():
        if section not in known_sections:
            raise ValidationError(f"{_where(lineno)}unknown section {section!r}")

    def take(section, key):
        return entries.pop((section, key), (None, None))

    # run.mode
    mode, lineno = take("run", "mode")
    if mode is None:
        raise ValidationError("missing run.mode")
    if mode not in MODES:
        raise ValidationError(f"{_where(lineno)}unknown mode {mode!r}; "
                              f"expected one of {', '.join(MODES)}")

    # model block
    model: dict = {}
    kind, lineno = take("model", "kind")
    if kind is None:
        raise ValidationError("missing model.kind")
    if kind not in ("discrete", "continuous"):
        raise ValidationError(f"{_where(lineno)}model.kind must be discrete or continuous")
    model["kind"] = kind
    want_kind = _MODE_KIND[mode]
    if want_kind is not None and kind != want_kind:
        raise ValidationError(f"mode {mode} needs a {want_kind} model, got {kind}")

    rate, lineno = take("model", "rate")
    if rate is None:
        raise ValidationError("missing model.rate")
    if rate not in _RATE_KEYS:
        raise ValidationError(f"{_where(lineno)}unknown rate family {rate!r}")
    if rate == "truncated-linear" and kind != "discrete":
        raise ValidationError(f"{_where(lineno)}truncated-linear rates are discrete only")
    model["rate"] = rate

    burst, lineno = take("model", "burst")
    if burst is None:
        raise ValidationError("missing model.burst")
    allowed_bursts = _DISCRETE_BURSTS if kind == "discrete" else _CONTINUOUS_BURSTS
    if burst not in allowed_bursts:
        raise ValidationError(f"{_where(lineno)}burst family {burst!r} not available "
                              f"for {kind} models ({', '.join(sorted(allowed_bursts))})")
    model["burst"] = burst

    value, lineno = take("model", "decay")
    if value is None:
        raise ValidationError("missing model.decay")
    model["decay"] = _as_float(value, "model.decay", lineno)

    for key in _RATE_KEYS[rate] + _BURST_KEYS[burst]:
        value, lineno = take("model", key)
        if value is None:
            raise ValidationError(f"rate/burst family needs model.{key}")
        model[key] = _as_float(value, f"model.{key}", lineno)

    # numeric block
    schema = dict(_COMMON_NUMERIC)
    schema.update(_MODE_NUMERIC[mode])
    numeric: dict = {}
    for key, (typ, required, default) in schema.items():
        value, lineno = take("numeric", key)
        if value is None:
            if required:
                raise ValidationError(f"mode {mode} needs numeric.{key}")
            numeric[key] = default
        elif typ is int:
            numeric[key] = _as_int(value, f"numeric.{key}", lineno)
        else:
            numeric[key] = _as_float(value, f"numeric.{key}", lineno)

    out_dir, _ = take("output", "dir")
    if out_dir is None:
        out_dir = "out"

    # anything still unclaimed is unknown or inapplicable
    if entries:
        (section, key), (_, lineno) = next(iter(entries.items()))
        raise ValidationError(f"{_where(lineno)}{section}.{key} is not a recognized "
                              f"key for mode {mode}")

    cfg = ExperimentConfig(mode=mode, model=model, numeric=numeric, out_dir=out_dir)
    try:
        cfg.build_model()
    except ModelError as exc:
        raise ValidationError(str(exc)) from exc
    return cfg


def _render_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def render_config(cfg: ExperimentConfig) -> str:
    """Canonical, fully explicit text form; parse() of it reproduces cfg."""
    lines = [f"run.mode = {cfg.mode}", ""]
    m = cfg.model
    lines.append(f"model.kind = {m['kind']}")
    lines.append(f"model.rate = {m['rate']}")
    for key in _RATE_KEYS[m["rate"]]:
        lines.append(f"model.{key} = {_render_value(m[key])}")
    lines.append(f"model.decay = {_render_value(m['decay'])}")
    lines.append(f"model.burst = {m['burst']}")
    for key in _BURST_KEYS[m["burst"]]:
        lines.append(f"model.{key} = {_render_value(m[key])}")
    lines.append("")
    for key in _NUMERIC_ORDER:
        if key in cfg.numeric:
            lines.append(f"numeric.{key} = {_render_value(cfg.numeric[key])}")
    lines.append("")
    lines.append(f"output.dir = {cfg.out_dir}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# running experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunSummary:
    """What a run produced, with enough context to reproduce it exactly."""

    mode: str
    seed: int
    stream: int
    wall_time_s: float
    scalars: dict
    artifacts: list
    config_text: str

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "stream": self.stream,
            "wall_time_s": self.wall_time_s,
            "scalars": self.scalars,
            "artifacts": self.artifacts,
            "config": self.config_text,
        }


def _run_stationary_discrete(cfg, model, out: Path):
    num = cfg.numeric
    tail_tol = num["tail_tol"] if num["tail_tol"] > 0 else None
    pmf = disc.stationary_pmf_general(model, num["n_max"], tail_tol=tail_tol)
    write_pmf_csv(out / "pmf.csv", pmf.values)
    scalars = {"mean_identity_residual": disc.mean_identity_residual(model, pmf)}
    family = disc.named_family_params(model)
    if family is not None:
        scalars["family"] = type(family).__name__
        scalars["family_residual"] = float(
            np.max(np.abs(pmf.values - family.pmf(pmf.n_max))))
    return scalars, ["pmf.csv"]


def _run_stationary_continuous(cfg, model, out: Path):
    num = cfg.numeric
    density = cont.stationary_density(model, n_knots=num["n_knots"], x_ref=num["x_ref"])
    write_density_csv(out / "density.csv", density.grid, density.values)
    return {"normalization": density.normalization, "mass": density.mass()}, ["density.csv"]


def _run_evolve_master(cfg, model, out: Path):
    num = cfg.numeric
    if not 0 <= num["n0"] <= num["n_max"]:
        raise ValidationError(f"numeric.n0 must lie in [0, n_max], got {num['n0']}")
    v0 = np.zeros(num["n_max"] + 1)
    v0[num["n0"]] = 1.0
    stepper = StepperConfig(rel_tol=num["rel_tol"], abs_tol=num["abs_tol"])
    trace = disc.evolve_master(model, v0, num["t_end"], stepper,
                               n_snapshots=num["n_snapshots"])
    write_trace_csv(out / "trace.csv", trace.times, trace.l1_to_stationary)
    write_pmf_csv(out / "final_pmf.csv", trace.pmfs[-1].values)
    drift = max(abs(p.mass() - 1.0) for p in trace.pmfs)
    scalars = {"final_l1": float(trace.l1_to_stationary[-1]), "max_mass_drift": drift}
    return scalars, ["trace.csv", "final_pmf.csv"]


def _run_simulate_discrete(cfg, model, out: Path):
    num = cfg.numeric
    res = disc.simulate_jump_chain(model, num["n0"], num["n_jumps"],
                                   num["seed"], stream=num["stream"])
    write_pmf_csv(out / "occupancy.csv", res.occupancy.values)
    scalars = {
        "total_time": res.total_time,
        "jumps_taken": int(len(res.wait_draws)),
        "absorbed": res.absorbed,
    }
    try:
        target = disc.stationary_pmf_general(model, res.occupancy.n_max, tail_tol=None)
        scalars["tv_to_stationary"] = tv_distance(res.occupancy.values, target.values)
    except NumericError:
        pass  # non-normalizable models still simulate fine
    return scalars, ["occupancy.csv"]


def _run_simulate_pdmp(cfg, model, out: Path):
    num = cfg.numeric
    traj = cont.simulate_pdmp(model, num["y0"], num["n_jumps"], num["seed"],
                              stream=num["stream"], x_ref=num["x_ref"],
                              n_bins=num["n_bins"])
    write_trajectory_csv(out / "trajectory.csv", traj.times, traj.y_pre, traj.y_post)
    d = traj.histogram.density()
    write_density_csv(out / "histogram.csv", d.grid, d.values)
    hist = traj.histogram
    scalars = {
        "total_time": hist.total_time,
        "outside_fraction": (hist.below + hist.above) / hist.total_time,
    }
    return scalars, ["trajectory.csv", "histogram.csv"]


def _run_kernel_fixed_point(cfg, model, out: Path):
    num = cfg.numeric
    grid = cont.kernel_grid(model, num["n_knots"], leak_tol=num["leak_tol"])
    kern = cont.kernel_matrix(model, grid, x_ref=num["x_ref"])
    v_star = cont.kernel_fixed_point(kern, tol=num["tol"], max_iter=num["max_iter"])
    u_star = cont.density_from_fixed_point(model, v_star, x_ref=num["x_ref"])
    write_density_csv(out / "vstar.csv", v_star.grid, v_star.values)
    write_density_csv(out / "density.csv", u_star.grid, u_star.values)
    scalars = {
        "fixed_point_residual": kern.residual(v_star),
        "min_column_sum": float(np.min(kern.raw_column_sums)),
        "normalization": u_star.normalization,
    }
    return scalars, ["vstar.csv", "density.csv"]


def _run_invert_phi(cfg, model, out: Path):
    num = cfg.numeric
    density = cont.stationary_density(model, n_knots=num["n_knots"], x_ref=num["x_ref"])
    xs, phi = cont.phi_from_density_grid(model.decay, model.burst_size, density,
                                         floor=num["floor"])
    write_pairs_csv(out / "phi.csv", "x,phi", xs, phi)
    truth = np.asarray(model.burst_rate.value(xs), dtype=float)
    scalars = {"max_relative_error": float(np.max(np.abs(phi / truth - 1.0)))}
    return scalars, ["phi.csv"]


def _run_modes(cfg, model, out: Path):
    num = cfg.numeric
    if isinstance(model, DiscreteBurstModel):
        report = disc.count_modes_discrete(model, num["n_max"])
        write_modes_csv(out / "modes.csv",
                        [float(n) for n in report.maxima],
                        ["max"] * len(report.maxima))
        scalars = {
            "n_maxima": len(report.maxima),
            "boundary_mode": report.boundary_mode,
        }
    else:
        window = None
        if num["window_lo"] > 0 and num["window_hi"] > 0:
            window = (num["window_lo"], num["window_hi"])
        report = cont.count_modes_continuous(model, window=window, n_scan=num["n_scan"])
        write_modes_csv(out / "modes.csv", report.roots, report.kinds)
        scalars = {
            "n_maxima": sum(1 for k in report.kinds if k == "max"),
            "n_roots": len(report.roots),
            "boundary_mode": report.boundary_mode,
        }
    return scalars, ["modes.csv"]


def _run_ergodicity(cfg, model, out: Path):
    num = cfg.numeric
    if num["n_probes"] < 1:
        raise ValidationError("numeric.n_probes must be >= 1")
    probes = np.geomspace(num["y_probe"] * 1e-2, num["y_probe"], num["n_probes"])
    margins, running = cont.ergodicity_scan(model, probes, quad_tol=num["quad_tol"])
    write_pairs_csv(out / "margins.csv", "y,margin", probes, margins)
    scalars = {
        "max_margin": float(running[-1]),
        "drift_negative": bool(running[-1] < 0.0),
    }
    return scalars, ["margins.csv"]


_RUNNERS = {
    "stationary-discrete": _run_stationary_discrete,
    "stationary-continuous": _run_stationary_continuous,
    "evolve-master": _run_evolve_master,
    "simulate-discrete": _run_simulate_discrete,
    "simulate-pdmp": _run_simulate_pdmp,
    "kernel-fixed-point": _run_kernel_fixed_point,
    "invert-phi": _run_invert_phi,
    "modes": _run_modes,
    "ergodicity": _run_ergodicity,
}


def run_experiment(cfg: ExperimentConfig) -> RunSummary:
    """Dispatch one experiment, write its artifacts plus summary.json."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = cfg.build_model()
    started = time.perf_counter()
    scalars, artifacts = _RUNNERS[cfg.mode](cfg, model, out)
    summary = RunSummary(
        mode=cfg.mode,
        seed=cfg.numeric["seed"],
        stream=cfg.numeric["stream"],
        wall_time_s=time.perf_counter() - started,
        scalars=scalars,
        artifacts=artifacts,
        config_text=render_config(cfg),
    )
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

def _parse_sweep(spec: str, cfg: ExperimentConfig):
    """'section.key=start:stop:count' -> ((section, key), values)."""
    head, eq, rng = spec.partition("=")
    if not eq:
        raise ParseError("sweep spec must look like section.key=start:stop:count")
    section, dot, key = head.strip().partition(".")
    if not dot or section not in ("model", "numeric"):
        raise ValidationError(f"can only sweep model.* or numeric.* keys, got {head!r}")
    block = cfg.model if section == "model" else cfg.numeric
    if key not in block or not isinstance(block[key], (int, float)) \
            or isinstance(block[key], bool):
        raise ValidationError(f"{head.strip()!r} is not a sweepable scalar of this config")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ParseError("sweep range must be start:stop:count")
    start = _as_float(parts[0], "sweep start", None)
    stop = _as_float(parts[1], "sweep stop", None)
    count = _as_int(parts[2], "sweep count", None)
    if count < 1:
        raise ValidationError(f"sweep count must be >= 1, got {count}")
    return (section, key), np.linspace(start, stop, count)


def _sweep_point(cfg: ExperimentConfig, section: str, key: str,
                 value: float, index: int) -> ExperimentConfig:
    model = dict(cfg.model)
    numeric = dict(cfg.numeric)
    block = model if section == "model" else numeric
    applied = int(round(value)) if isinstance(block[key], int) else float(value)
    block[key] = applied
    numeric["stream"] = index  # independent generator split per point
    out_dir = str(Path(cfg.out_dir) / f"sweep_{index:04d}")
    return ExperimentConfig(cfg.mode, model, numeric, out_dir)


def _worker_count(n_points: int) -> int:
    env = os.environ.get("BURSTKIN_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValidationError(f"BURSTKIN_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValidationError("BURSTKIN_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_points))


def run_sweep(cfg: ExperimentConfig, spec: str) -> int:
    """Run one experiment per sweep value; classify failures per row.

    The sweep exits 0 whenever the sweep itself ran: per-point outcomes
    (including non-normalizable parameter regions) are data, recorded in
    sweep_summary.csv, not reasons to abort the scan.
    """
    (section, key), values = _parse_sweep(spec, cfg)
    points = [_sweep_point(cfg, section, key, float(v), i)
              for i, v in enumerate(values)]

    def one(point: ExperimentConfig):
        try:
            summary = run_experiment(point)
        except ConfigError as exc:
            return {"status": "config-error", "detail": str(exc)}
        except NumericError as exc:
            return {"status": f"numeric-error:{type(exc).__name__}", "detail": str(exc)}
        row = {"status": "ok", "detail": ""}
        row.update({k: v for k, v in summary.scalars.items()})
        return row

    with concurrent.futures.ThreadPoolExecutor(_worker_count(len(points))) as pool:
        rows = list(pool.map(one, points))

    scalar_keys = sorted({k for row in rows for k in row} - {"status", "detail"})
    base = Path(cfg.out_dir)
    base.mkdir(parents=True, exist_ok=True)
    with open(base / "sweep_summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", f"{section}.{key}", "status", "detail"] + scalar_keys)
        for i, (value, row) in enumerate(zip(values, rows)):
            writer.writerow([str(i), format_float(value),
                             row["status"], row["detail"]]
                            + [_render_value(row[k]) if k in row else ""
                               for k in scalar_keys])
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="burstkin",
        description="Bursty birth-death kinetics: stationary laws, master-equation "
                    "evolution, event-driven simulation, kernel fixed points, rate "
                    "inversion, and mode censuses.")
    parser.add_argument("mode", choices=MODES, help="experiment to run")
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--seed", type=int, help="override numeric.seed")
    parser.add_argument("--out", help="override output.dir")
    parser.add_argument("--sweep", metavar="SECTION.KEY=START:STOP:COUNT",
                        help="vary one scalar across a range, one run per value")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1

    overrides = {("run", "mode"): args.mode}
    if args.seed is not None:
        overrides[("numeric", "seed")] = str(args.seed)
    if args.out is not None:
        overrides[("output", "dir")] = args.out

    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.sweep is not None:
            return run_sweep(cfg, args.sweep)
        summary = run_experiment(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    print(f"{summary.mode}: {', '.join(summary.artifacts)} -> {cfg.out_dir} "
          f"({summary.wall_time_s:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
