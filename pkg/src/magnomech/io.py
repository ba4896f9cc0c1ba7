"""Configuration files and result serialization.

Configuration is YAML with strict unknown-key rejection (silent typos in
physics parameters are the costliest failure mode). Frequencies and rates
are quoted as value/2pi in MHz, temperatures in kelvin, the feedback phase
in units of pi; everything is converted to internal angular units (rad/s)
exactly once at load time. The same unit table drives emission, so a dumped
configuration reloads to the identical in-memory values.

Result files: CSV in long format (header ``axis1,axis2,pair,E_N,stability``,
one row per grid point and pair) and JSON with a metadata object plus column
arrays. Floats are written with 12 significant digits; non-stable points
carry ``NA``/``null`` markers. Axis values are written in configuration
units. Emitted files contain no timestamps, so identical runs produce
identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ._version import __version__
from .entanglement import PAIRS, ModePair, pair_from_label
from .errors import ParseError, UnknownKeyError, ValidationError
from .params import MHZ, TWO_PI, DriveSpec, FeedbackSpec, SystemParams
from .presets import baseline_params, preset_jobs, run_job
from .sweep import DetuningMode, SweepAxis, SweepResult, SWEEPABLE_PARAMETERS

HZ = TWO_PI

# (config key, SystemParams field, scale to internal units)
_SYSTEM_KEYS = (
    ("kappa_c_mhz", "kappa_c", MHZ),
    ("kappa_m_mhz", "kappa_m", MHZ),
    ("gamma_e_mhz", "gamma_e", MHZ),
    ("gamma_b_mhz", "gamma_b", MHZ),
    ("omega_b_mhz", "omega_b", MHZ),
    ("Delta_1_mhz", "Delta_1", MHZ),
    ("Delta_2_mhz", "Delta_2", MHZ),
    ("Delta_e_mhz", "Delta_e", MHZ),
    ("Delta_m_eff_mhz", "Delta_m_eff", MHZ),
    ("g_mc_mhz", "g_mc", MHZ),
    ("G_mb_mhz", "G_mb", MHZ),
    ("G_ce_mhz", "G_ce", MHZ),
    ("J_mhz", "J", MHZ),
    ("T_kelvin", "T", 1.0),
    ("omega_c1_mhz", "omega_c1", MHZ),
    ("omega_c2_mhz", "omega_c2", MHZ),
    ("omega_m_mhz", "omega_m", MHZ),
)

_DRIVE_KEYS = (
    ("P_watt", "P", 1.0),
    ("omega_l_mhz", "omega_l", MHZ),
    ("B0_tesla", "B_0", 1.0),
    ("sphere_diameter_m", "sphere_diameter", 1.0),
    ("g_mb_bare_hz", "g_mb_bare", HZ),
    ("Delta_m_bare_mhz", "Delta_m_bare", MHZ),
)

_TOP_KEYS = ("system", "drive", "sweep", "optimize", "output")
_AXIS_KEYS = ("parameter", "start", "stop", "count")
_SWEEP_KEYS = ("detuning_mode", "pairs", "axis1", "axis2")
_OPTIMIZE_KEYS = ("pair", "free", "bounds")
_OUTPUT_KEYS = ("dir", "format", "workers")

NA = "NA"


def parameter_scale(name: str) -> float:
    """Scale from a sweep parameter's configuration unit to internal units."""
    if name in ("T", "r_B"):
        return 1.0
    if name == "phi":
        return math.pi
    return MHZ


@dataclass(frozen=True)
class SweepSection:
    mode: DetuningMode = DetuningMode.INDEPENDENT
    pairs: tuple[ModePair, ...] = ()
    axis1: SweepAxis | None = None
    axis2: SweepAxis | None = None


@dataclass(frozen=True)
class OptimizeSection:
    pair: ModePair
    free: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    format: str = "csv"
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    drive: DriveSpec | None = None
    sweep: SweepSection | None = None
    optimize: OptimizeSection | None = None
    output: OutputSection = field(default_factory=OutputSection)


def _require_mapping(obj, context: str) -> dict:
    if not isinstance(obj, dict):
        raise ValidationError(f"{context} must be a mapping")
    return obj


def _reject_unknown(mapping: dict, allowed, context: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise UnknownKeyError(f"unknown key {context}.{key}")


def _number(mapping: dict, key: str, context: str) -> float:
    if key not in mapping:
        raise ValidationError(f"missing key {context}.{key}")
    value = mapping[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{context}.{key} must be a number")
    return float(value)


def _parse_system(raw: dict) -> SystemParams:
    context = "system"
    allowed = tuple(k for k, _, _ in _SYSTEM_KEYS) + ("r_B", "phi_over_pi")
    _reject_unknown(raw, allowed, context)
    values = {f: _number(raw, k, context) * s for k, f, s in _SYSTEM_KEYS}
    r_B = _number(raw, "r_B", context)
    phi = _number(raw, "phi_over_pi", context) * math.pi
    try:
        feedback = FeedbackSpec(r_B=r_B, phi=phi)
        return SystemParams(feedback=feedback, **values)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def _parse_drive(raw: dict) -> DriveSpec:
    context = "drive"
    _reject_unknown(raw, tuple(k for k, _, _ in _DRIVE_KEYS), context)
    values = {f: _number(raw, k, context) * s for k, f, s in _DRIVE_KEYS}
    try:
        return DriveSpec(**values)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def _parse_axis(raw: dict, context: str) -> SweepAxis:
    raw = _require_mapping(raw, context)
    _reject_unknown(raw, _AXIS_KEYS, context)
    if "parameter" not in raw:
        raise ValidationError(f"missing key {context}.parameter")
    name = raw["parameter"]
    if name not in SWEEPABLE_PARAMETERS:
        raise ValidationError(f"{context}.parameter: unknown parameter {name!r}")
    count = raw.get("count")
    if not isinstance(count, int) or isinstance(count, bool):
        raise ValidationError(f"{context}.count must be an integer")
    scale = parameter_scale(name)
    try:
        return SweepAxis(parameter=name,
                         start=_number(raw, "start", context) * scale,
                         stop=_number(raw, "stop", context) * scale,
                         count=count)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def _parse_pairs(raw, context: str) -> tuple[ModePair, ...]:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{context} must be a non-empty list of pair labels")
    try:
        return tuple(pair_from_label(str(label)) for label in raw)
    except ValueError as exc:
        raise ValidationError(f"{context}: {exc}") from exc


def _parse_sweep(raw: dict) -> SweepSection:
    context = "sweep"
    _reject_unknown(raw, _SWEEP_KEYS, context)
    mode = DetuningMode.INDEPENDENT
    if "detuning_mode" in raw:
        try:
            mode = DetuningMode(raw["detuning_mode"])
        except ValueError:
            raise ValidationError(
                f"{context}.detuning_mode must be one of "
                f"{[m.value for m in DetuningMode]}") from None
    pairs = _parse_pairs(raw["pairs"], f"{context}.pairs") if "pairs" in raw else ()
    axis1 = _parse_axis(raw["axis1"], f"{context}.axis1") if "axis1" in raw else None
    axis2 = _parse_axis(raw["axis2"], f"{context}.axis2") if "axis2" in raw else None
    return SweepSection(mode=mode, pairs=pairs, axis1=axis1, axis2=axis2)


def _parse_optimize(raw: dict) -> OptimizeSection:
    context = "optimize"
    _reject_unknown(raw, _OPTIMIZE_KEYS, context)
    if "pair" not in raw:
        raise ValidationError(f"missing key {context}.pair")
    try:
        pair = pair_from_label(str(raw["pair"]))
    except ValueError as exc:
        raise ValidationError(f"{context}.pair: {exc}") from exc
    free = raw.get("free")
    if not isinstance(free, list) or not free:
        raise ValidationError(f"{context}.free must be a non-empty list")
    for name in free:
        if name not in SWEEPABLE_PARAMETERS:
            raise ValidationError(f"{context}.free: unknown parameter {name!r}")
    bounds_raw = raw.get("bounds")
    if not isinstance(bounds_raw, list) or len(bounds_raw) != len(free):
        raise ValidationError(f"{context}.bounds must list one [lo, hi] per "
                              "free parameter")
    bounds = []
    for name, pair_raw in zip(free, bounds_raw):
        if not isinstance(pair_raw, list) or len(pair_raw) != 2:
            raise ValidationError(f"{context}.bounds entries must be [lo, hi]")
        scale = parameter_scale(name)
        lo, hi = float(pair_raw[0]) * scale, float(pair_raw[1]) * scale
        if not lo < hi:
            raise ValidationError(f"{context}.bounds for {name!r} are empty")
        bounds.append((lo, hi))
    return OptimizeSection(pair=pair, free=tuple(free), bounds=tuple(bounds))


def _parse_output(raw: dict) -> OutputSection:
    context = "output"
    _reject_unknown(raw, _OUTPUT_KEYS, context)
    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"{context}.format must be 'csv' or 'json'")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ValidationError(f"{context}.workers must be a positive integer")
    out_dir = raw.get("dir", "out")
    if not isinstance(out_dir, str):
        raise ValidationError(f"{context}.dir must be a string")
    return OutputSection(dir=out_dir, format=fmt, workers=workers)


def load_config(path) -> RunConfig:
    """Parse and validate a configuration file.

    Raises ParseError for unreadable or non-mapping YAML, UnknownKeyError for
    keys outside the schema, and ValidationError (naming the key) for missing
    or out-of-range values.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed YAML in {path}: {exc}") from exc
    if raw is None:
        raise ParseError(f"configuration file {path} is empty")
    if not isinstance(raw, dict):
        raise ParseError(f"configuration file {path} must contain a mapping")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "system" not in raw:
        raise ValidationError("missing section 'system'")
    return RunConfig(
        system=_parse_system(_require_mapping(raw["system"], "system")),
        drive=_parse_drive(_require_mapping(raw["drive"], "drive"))
        if "drive" in raw else None,
        sweep=_parse_sweep(_require_mapping(raw["sweep"], "sweep"))
        if "sweep" in raw else None,
        optimize=_parse_optimize(_require_mapping(raw["optimize"], "optimize"))
        if "optimize" in raw else None,
        output=_parse_output(_require_mapping(raw["output"], "output"))
        if "output" in raw else OutputSection(),
    )


def _config_value(internal: float, scale: float) -> float:
    """Shortest decimal in configuration units that reloads to ``internal``."""
    exact = internal / scale
    for digits in range(1, 17):
        candidate = float(f"{exact:.{digits}g}")
        if candidate * scale == internal:
            return candidate
    return exact


def system_to_dict(p: SystemParams) -> dict:
    """SystemParams rendered back into configuration units."""
    out = {key: _config_value(getattr(p, f), s) for key, f, s in _SYSTEM_KEYS}
    out["r_B"] = p.feedback.r_B
    out["phi_over_pi"] = _config_value(p.feedback.phi, math.pi)
    return out


def drive_to_dict(d: DriveSpec) -> dict:
    return {key: _config_value(getattr(d, f), s) for key, f, s in _DRIVE_KEYS}


def _axis_to_dict(ax: SweepAxis) -> dict:
    scale = parameter_scale(ax.parameter)
    return {"parameter": ax.parameter, "start": _config_value(ax.start, scale),
            "stop": _config_value(ax.stop, scale), "count": ax.count}


def dump_config(cfg: RunConfig, path) -> Path:
    """Write a configuration file that reloads to the same in-memory values."""
    doc: dict = {"system": system_to_dict(cfg.system)}
    if cfg.drive is not None:
        doc["drive"] = drive_to_dict(cfg.drive)
    if cfg.sweep is not None:
        section: dict = {"detuning_mode": cfg.sweep.mode.value}
        if cfg.sweep.pairs:
            section["pairs"] = [p.label for p in cfg.sweep.pairs]
        if cfg.sweep.axis1 is not None:
            section["axis1"] = _axis_to_dict(cfg.sweep.axis1)
        if cfg.sweep.axis2 is not None:
            section["axis2"] = _axis_to_dict(cfg.sweep.axis2)
        doc["sweep"] = section
    if cfg.optimize is not None:
        doc["optimize"] = {
            "pair": cfg.optimize.pair.label,
            "free": list(cfg.optimize.free),
            "bounds": [[_config_value(lo, parameter_scale(name)),
                        _config_value(hi, parameter_scale(name))]
                       for name, (lo, hi) in
                       zip(cfg.optimize.free, cfg.optimize.bounds)],
        }
    doc["output"] = {"dir": cfg.output.dir, "format": cfg.output.format,
                     "workers": cfg.output.workers}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(doc, sort_keys=False))
    return path


def default_config() -> RunConfig:
    """Baseline configuration: the shared operating point plus a detuning map."""
    omega_b_mhz = 10.0
    return RunConfig(
        system=baseline_params(),
        sweep=SweepSection(
            mode=DetuningMode.INDEPENDENT,
            pairs=(pair_from_label("be"), pair_from_label("me")),
            axis1=SweepAxis("Delta_1", -5 * omega_b_mhz * MHZ,
                            5 * omega_b_mhz * MHZ, 101),
            axis2=SweepAxis("Delta_2", -5 * omega_b_mhz * MHZ,
                            5 * omega_b_mhz * MHZ, 101),
        ),
        optimize=OptimizeSection(
            pair=pair_from_label("be"),
            free=("Delta_1", "Delta_2"),
            bounds=((-5 * omega_b_mhz * MHZ, 5 * omega_b_mhz * MHZ),
                    (-5 * omega_b_mhz * MHZ, 5 * omega_b_mhz * MHZ)),
        ),
        output=OutputSection(),
    )


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _round12(value: float) -> float | None:
    if math.isnan(value):
        return None
    return float(f"{value:.12g}")


def emit_results(result: SweepResult, fmt: str, path) -> Path:
    """Serialize a sweep result to CSV or JSON.

    CSV rows follow the fixed header ``axis1,axis2,pair,E_N,stability``; the
    row count is always (grid points) x (pairs). Axis values are written in
    configuration units; non-stable points carry NA/null entanglement.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown output format {fmt!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = result.axis_columns()
    scaled = [col / parameter_scale(ax.parameter)
              for ax, col in zip(result.axes, columns)]
    n_points = result.n_points

    if fmt == "csv":
        lines = ["axis1,axis2,pair,E_N,stability"]
        for i in range(n_points):
            a1 = _fmt(scaled[0][i]) if len(scaled) >= 1 else ""
            a2 = _fmt(scaled[1][i]) if len(scaled) == 2 else ""
            status = result.stability[i]
            for j, pair in enumerate(result.pairs):
                value = result.values[i, j]
                cell = NA if math.isnan(value) else _fmt(value)
                lines.append(f"{a1},{a2},{pair.label},{cell},{status}")
        path.write_text("\n".join(lines) + "\n")
        return path

    axis1 = [_round12(v) for v in scaled[0]] if len(scaled) >= 1 else []
    axis2 = [_round12(v) for v in scaled[1]] if len(scaled) == 2 else []
    doc = {
        "metadata": {
            "tool_version": __version__,
            "preset": result.provenance.get("preset"),
            "detuning_mode": result.mode.value,
            "parameters": {k: _round12(v)
                           for k, v in system_to_dict(result.params_snapshot).items()},
            "axes": [_axis_to_dict(ax) for ax in result.axes],
        },
        "columns": {
            "axis1": [axis1[i] for i in range(n_points)
                      for _ in result.pairs] if axis1 else [],
            "axis2": [axis2[i] for i in range(n_points)
                      for _ in result.pairs] if axis2 else [],
            "pair": [pair.label for _ in range(n_points)
                     for pair in result.pairs],
            "E_N": [_round12(result.values[i, j])
                    for i in range(n_points)
                    for j in range(len(result.pairs))],
            "stability": [result.stability[i] for i in range(n_points)
                          for _ in result.pairs],
        },
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def run_figure_preset(name: str, out_dir, *, workers: int = 1,
                      count_override: int | None = None) -> list[Path]:
    """Execute every sweep of a named preset and write CSV + JSON outputs."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    for job in preset_jobs(name, count_override=count_override):
        result = run_job(job, workers=workers)
        result.provenance["preset"] = name
        stem = name if not job.tag else f"{name}_{job.tag}"
        written.append(emit_results(result, "csv", out_dir / f"{stem}.csv"))
        written.append(emit_results(result, "json", out_dir / f"{stem}.json"))
    return written
