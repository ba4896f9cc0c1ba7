"""Command-line front end.

Commands: point, sweep1d, sweep2d, tempscan, fbscan, optimize, figure.
Everything is deterministic; there is no randomness to seed. Exit codes:
0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from ._version import __version__
from .entanglement import PAIRS
from .errors import ConfigError, NumericalError, ValidationError
from .io import (OutputSection, RunConfig, drive_to_dict, emit_results,
                 load_config, run_figure_preset, system_to_dict)
from .params import (apply_steady_state, drive_amplitudes,
                     low_excitation_ratios, solve_steady_state)
from .presets import PRESET_NAMES
from .sweep import (DetuningMode, SweepAxis, evaluate_single, optimize_entanglement,
                    scan_feedback, sweep_1d, sweep_2d)

TEMP_AXIS_DEFAULT = SweepAxis("T", 0.0, 0.6, 401)
FB_R_AXIS_DEFAULT = SweepAxis("r_B", 0.0, 0.99, 101)
FB_PHI_AXIS_DEFAULT = SweepAxis("phi", 0.0, 2.0 * math.pi, 101)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magnomech",
        description="Steady-state entanglement of the feedback-assisted "
                    "coupled-cavity magnomechanical system.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required,
                       help="YAML configuration file")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default from config)")
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format (default from config)")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel workers (default from config)")

    add_common(sub.add_parser(
        "point", help="all ten pair entanglements at one operating point"))
    add_common(sub.add_parser("sweep1d", help="one-axis scan"))
    add_common(sub.add_parser("sweep2d", help="two-axis grid scan"))
    add_common(sub.add_parser("tempscan", help="temperature scan"))
    add_common(sub.add_parser("fbscan", help="feedback reflectivity/phase scan"))
    add_common(sub.add_parser(
        "optimize", help="maximize one pair over bounded parameters"))
    figure = sub.add_parser("figure", help="run a bundled figure preset")
    figure.add_argument("preset", choices=PRESET_NAMES)
    figure.add_argument("--out", type=Path, default=Path("out"))
    figure.add_argument("--workers", type=int, default=1)
    return parser


def _output_settings(cfg: RunConfig, args) -> OutputSection:
    out = cfg.output
    return OutputSection(
        dir=str(args.out) if args.out is not None else out.dir,
        format=args.format if args.format is not None else out.format,
        workers=args.workers if args.workers is not None else out.workers)


def _emit(result, out: OutputSection, stem: str, write: bool) -> None:
    if not write:
        return
    path = emit_results(result, out.format, Path(out.dir) / f"{stem}.{out.format}")
    print(f"wrote {path}")


def _sweep_pairs(cfg: RunConfig):
    if cfg.sweep is not None and cfg.sweep.pairs:
        return cfg.sweep.pairs
    return PAIRS


def _cmd_point(cfg: RunConfig, args) -> int:
    params = cfg.system
    if cfg.drive is not None:
        eps_l, eps_m = drive_amplitudes(cfg.drive, params.kappa_c)
        state = solve_steady_state(params, cfg.drive, eps_l, eps_m)
        params = apply_steady_state(params, state)
        coupling_ratio, occupation_ratio = low_excitation_ratios(params, state)
        print("microscopic mode: derived effective parameters")
        print(f"  Delta_m_eff/2pi = {state.Delta_m_eff_out / (2e6 * math.pi):.6g} MHz")
        print(f"  G_mb/2pi        = {state.G_mb_out / (2e6 * math.pi):.6g} MHz")
        print(f"  |c1s| = {abs(state.c1s):.6g}  |ms| = {abs(state.ms):.6g}  "
              f"qs = {state.qs:.6g}")
        print(f"  residual = {state.residual:.3e}")
        print(f"  low-excitation ratios: G_ce^2/(Delta_e^2+gamma_e^2) = "
              f"{coupling_ratio:.3e}, 1/|c1s|^2 = {occupation_ratio:.3e}")
    result = evaluate_single(params, PAIRS)
    status = result.stability[0]
    print(f"stability: {status} (max Re eig = {result.max_real_eig[0]:.6e} rad/s)")
    for j, pair in enumerate(result.pairs):
        value = result.values[0, j]
        cell = "NA" if math.isnan(value) else f"{value:.6f}"
        print(f"  E_N[{pair.label:>4}] = {cell}")
    out = _output_settings(cfg, args)
    _emit(result, out, "point", write=args.out is not None)
    return 0


def _cmd_sweep1d(cfg: RunConfig, args) -> int:
    if cfg.sweep is None or cfg.sweep.axis1 is None:
        raise ValidationError("sweep1d requires sweep.axis1 in the configuration")
    result = sweep_1d(cfg.system, cfg.sweep.axis1, cfg.sweep.mode,
                      _sweep_pairs(cfg), workers=_output_settings(cfg, args).workers)
    _emit(result, _output_settings(cfg, args), "sweep1d", write=True)
    return 0


def _cmd_sweep2d(cfg: RunConfig, args) -> int:
    if cfg.sweep is None or cfg.sweep.axis1 is None or cfg.sweep.axis2 is None:
        raise ValidationError(
            "sweep2d requires sweep.axis1 and sweep.axis2 in the configuration")
    result = sweep_2d(cfg.system, cfg.sweep.axis1, cfg.sweep.axis2,
                      cfg.sweep.mode, _sweep_pairs(cfg),
                      workers=_output_settings(cfg, args).workers)
    _emit(result, _output_settings(cfg, args), "sweep2d", write=True)
    return 0


def _cmd_tempscan(cfg: RunConfig, args) -> int:
    axis = TEMP_AXIS_DEFAULT
    if cfg.sweep is not None and cfg.sweep.axis1 is not None:
        if cfg.sweep.axis1.parameter != "T":
            raise ValidationError("tempscan requires sweep.axis1.parameter == 'T'")
        axis = cfg.sweep.axis1
    mode = cfg.sweep.mode if cfg.sweep is not None else DetuningMode.INDEPENDENT
    result = sweep_1d(cfg.system, axis, mode, _sweep_pairs(cfg),
                      workers=_output_settings(cfg, args).workers)
    _emit(result, _output_settings(cfg, args), "tempscan", write=True)
    return 0


def _cmd_fbscan(cfg: RunConfig, args) -> int:
    r_axis, phi_axis = FB_R_AXIS_DEFAULT, FB_PHI_AXIS_DEFAULT
    if cfg.sweep is not None and cfg.sweep.axis1 is not None:
        if cfg.sweep.axis1.parameter != "r_B":
            raise ValidationError("fbscan requires sweep.axis1.parameter == 'r_B'")
        r_axis = cfg.sweep.axis1
    if cfg.sweep is not None and cfg.sweep.axis2 is not None:
        if cfg.sweep.axis2.parameter != "phi":
            raise ValidationError("fbscan requires sweep.axis2.parameter == 'phi'")
        phi_axis = cfg.sweep.axis2
    result = scan_feedback(cfg.system, r_axis, phi_axis, _sweep_pairs(cfg),
                           workers=_output_settings(cfg, args).workers)
    _emit(result, _output_settings(cfg, args), "fbscan", write=True)
    return 0


def _cmd_optimize(cfg: RunConfig, args) -> int:
    if cfg.optimize is None:
        raise ValidationError("optimize requires an optimize section")
    section = cfg.optimize
    out = _output_settings(cfg, args)
    mode = cfg.sweep.mode if cfg.sweep is not None else DetuningMode.INDEPENDENT
    best_params, best_value = optimize_entanglement(
        cfg.system, list(section.free), list(section.bounds), section.pair,
        mode=mode, workers=out.workers)
    print(f"best E_N[{section.pair.label}] = {best_value:.6f}")
    for name in section.free:
        if name == "r_B":
            value, unit = best_params.feedback.r_B, ""
        elif name == "phi":
            value, unit = best_params.feedback.phi / math.pi, " pi"
        elif name == "T":
            value, unit = best_params.T, " K"
        else:
            value, unit = getattr(best_params, name) / (2e6 * math.pi), " MHz"
        print(f"  {name} = {value:.6g}{unit}")
    result = evaluate_single(best_params, PAIRS)
    _emit(result, out, "optimize_best", write=True)
    return 0


def _cmd_figure(args) -> int:
    for path in run_figure_preset(args.preset, args.out, workers=args.workers):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "figure":
            return _cmd_figure(args)
        cfg = load_config(args.config)
        handler = {
            "point": _cmd_point,
            "sweep1d": _cmd_sweep1d,
            "sweep2d": _cmd_sweep2d,
            "tempscan": _cmd_tempscan,
            "fbscan": _cmd_fbscan,
            "optimize": _cmd_optimize,
        }[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
