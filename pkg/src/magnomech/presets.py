"""Bundled figure presets: named parameter sets and scan layouts covering the
standard detuning maps, line scans, temperature scans and feedback scans.

All presets share one experimentally motivated baseline (microwave cavities
near 10 GHz, a 10 MHz mechanical mode, MHz-scale couplings, 10 mK bath) and
override only detunings, the cavity-cavity coupling and the scanned axes.
Grid defaults are 101x101 for maps and 401 points for line scans, sized so a
full preset stays within desk-scale runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .entanglement import ModePair, pair_from_label
from .params import MHZ, TWO_PI, FeedbackSpec, SystemParams
from .sweep import DetuningMode, SweepAxis, SweepResult, scan_feedback, \
    sweep_1d, sweep_2d

OMEGA_B = 10.0 * MHZ

GRID_2D = 101
GRID_1D = 401


def baseline_params() -> SystemParams:
    """Shared baseline operating point (effective-mode entry path).

    Built from exact multiples of the configuration unit so the shipped
    configuration file reloads to these values bit for bit.
    """
    return SystemParams(
        kappa_c=1.0 * MHZ,
        kappa_m=1.0 * MHZ,
        gamma_e=1.0 * MHZ,
        gamma_b=1e-4 * MHZ,
        omega_b=10.0 * MHZ,
        Delta_1=-17.5 * MHZ,
        Delta_2=-17.5 * MHZ,
        Delta_e=-10.0 * MHZ,
        Delta_m_eff=9.0 * MHZ,
        g_mc=3.2 * MHZ,
        G_mb=4.8 * MHZ,
        G_ce=6.0 * MHZ,
        J=8.0 * MHZ,
        T=0.010,
        omega_c1=10000.0 * MHZ,
        omega_c2=10000.0 * MHZ,
        omega_m=10000.0 * MHZ,
        feedback=FeedbackSpec(r_B=0.75, phi=math.pi),
    )


@dataclass(frozen=True)
class SweepJob:
    """One sweep of a preset: parameter overrides plus axes, mode and pairs."""

    tag: str
    overrides: Mapping[str, float]
    axes: tuple[SweepAxis, ...]
    mode: DetuningMode
    pairs: tuple[ModePair, ...]

    def base_params(self) -> SystemParams:
        return replace(baseline_params(), **dict(self.overrides))


def _axis(parameter: str, lo_wb: float, hi_wb: float, count: int) -> SweepAxis:
    return SweepAxis(parameter, lo_wb * OMEGA_B, hi_wb * OMEGA_B, count)


def _pairs(*labels: str) -> tuple[ModePair, ...]:
    return tuple(pair_from_label(label) for label in labels)


def _detuning_map(pair: str, delta_e_wb: float) -> SweepJob:
    return SweepJob(
        tag="",
        overrides={"Delta_e": delta_e_wb * OMEGA_B},
        axes=(_axis("Delta_1", -5, 5, GRID_2D), _axis("Delta_2", -5, 5, GRID_2D)),
        mode=DetuningMode.INDEPENDENT,
        pairs=_pairs(pair),
    )


def _magnon_map(pair: str, mode: DetuningMode) -> SweepJob:
    return SweepJob(
        tag="",
        overrides={"J": OMEGA_B},
        axes=(_axis("Delta_c", -5, 5, GRID_2D),
              _axis("Delta_m_eff", 0, 2, GRID_2D)),
        mode=mode,
        pairs=_pairs(pair),
    )


def _ensemble_map(pair: str, mode: DetuningMode) -> SweepJob:
    return SweepJob(
        tag="",
        overrides={},
        axes=(_axis("Delta_c", -5, 5, GRID_2D), _axis("Delta_e", -5, 5, GRID_2D)),
        mode=mode,
        pairs=_pairs(pair),
    )


def _line_scan(mode: DetuningMode) -> SweepJob:
    return SweepJob(
        tag="",
        overrides={"J": 0.4 * OMEGA_B},
        axes=(_axis("Delta_c", -5, 5, GRID_1D),),
        mode=mode,
        pairs=_pairs("be", "me", "c1b", "c1m", "mb", "c2b", "c2m"),
    )


def _temperature_scan(tag: str, pair: str, d1_wb: float, d2_wb: float,
                      delta_e_wb: float) -> SweepJob:
    return SweepJob(
        tag=tag,
        overrides={"Delta_1": d1_wb * OMEGA_B, "Delta_2": d2_wb * OMEGA_B,
                   "Delta_e": delta_e_wb * OMEGA_B},
        axes=(SweepAxis("T", 0.0, 0.6, GRID_1D),),
        mode=DetuningMode.INDEPENDENT,
        pairs=_pairs(pair),
    )


def _feedback_scan(pair: str, d1_wb: float, d2_wb: float) -> SweepJob:
    return SweepJob(
        tag="",
        overrides={"Delta_1": d1_wb * OMEGA_B, "Delta_2": d2_wb * OMEGA_B},
        axes=(SweepAxis("r_B", 0.0, 0.99, GRID_2D),
              SweepAxis("phi", 0.0, TWO_PI, GRID_2D)),
        mode=DetuningMode.INDEPENDENT,
        pairs=_pairs(pair),
    )


PRESETS: dict[str, tuple[SweepJob, ...]] = {
    # Detuning maps at positive ensemble detuning: cavity-mechanics and
    # cavity-magnon pairs.
    "f1a": (_detuning_map("c1b", +1.0),),
    "f1b": (_detuning_map("c2b", +1.0),),
    "f1c": (_detuning_map("c1m", +1.0),),
    "f1d": (_detuning_map("c2m", +1.0),),
    # Distant-pair detuning maps at negative ensemble detuning.
    "f2a": (_detuning_map("be", -1.0),),
    "f2b": (_detuning_map("me", -1.0),),
    # Cavity detuning versus effective magnon detuning.
    "f5a": (_magnon_map("be", DetuningMode.SYMMETRIC),),
    "f5b": (_magnon_map("be", DetuningMode.ANTISYMMETRIC),),
    "f5c": (_magnon_map("me", DetuningMode.SYMMETRIC),),
    "f5d": (_magnon_map("me", DetuningMode.ANTISYMMETRIC),),
    # Cavity detuning versus ensemble detuning.
    "f6a": (_ensemble_map("be", DetuningMode.SYMMETRIC),),
    "f6b": (_ensemble_map("be", DetuningMode.ANTISYMMETRIC),),
    "f6c": (_ensemble_map("me", DetuningMode.SYMMETRIC),),
    "f6d": (_ensemble_map("me", DetuningMode.ANTISYMMETRIC),),
    # Seven-pair line scans over the common cavity detuning.
    "f7a": (_line_scan(DetuningMode.SYMMETRIC),),
    "f7b": (_line_scan(DetuningMode.ANTISYMMETRIC),),
    # Temperature robustness of the four optimized operating points.
    "f8": (
        _temperature_scan("be", "be", -0.88, 4.0, -1.0),
        _temperature_scan("me", "me", -0.88, 4.0, -1.0),
        _temperature_scan("c1b", "c1b", -4.0, 4.0, +1.0),
        _temperature_scan("c1m", "c1m", -4.0, 4.0, +1.0),
    ),
    # Feedback reflectivity/phase scans of the two distant pairs.
    "f9a": (_feedback_scan("be", -1.75, -1.75),),
    "f9b": (_feedback_scan("me", -2.0, -1.40),),
}

PRESET_NAMES = tuple(PRESETS)


def preset_jobs(name: str, *, count_override: int | None = None) -> tuple[SweepJob, ...]:
    """Jobs of one preset, optionally capping every axis count (for smoke runs)."""
    try:
        jobs = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of "
                         f"{', '.join(PRESET_NAMES)}") from None
    if count_override is None:
        return jobs
    capped = []
    for job in jobs:
        axes = tuple(replace(ax, count=min(ax.count, count_override))
                     for ax in job.axes)
        capped.append(replace(job, axes=axes))
    return tuple(capped)


def run_job(job: SweepJob, *, workers: int = 1) -> SweepResult:
    """Execute one preset job through the sweep engine."""
    base = job.base_params()
    if len(job.axes) == 2 and job.axes[0].parameter == "r_B":
        return scan_feedback(base, job.axes[0], job.axes[1], job.pairs,
                             workers=workers)
    if len(job.axes) == 2:
        return sweep_2d(base, job.axes[0], job.axes[1], job.mode, job.pairs,
                        workers=workers)
    return sweep_1d(base, job.axes[0], job.mode, job.pairs, workers=workers)
