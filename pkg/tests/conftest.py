"""Shared fixtures and samplers for the test suite."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from magnomech import (DriveSpec, FeedbackSpec, NonConvergence, SystemParams,
                       apply_steady_state, baseline_params, build_drift,
                       check_stability, drive_amplitudes, solve_steady_state)
from magnomech.dynamics import MARGINAL_BAND_FRACTION
from magnomech.params import MHZ, TWO_PI

# Optimized operating point used as the anchor for randomized perturbations,
# in units of the mechanical frequency.
TABLE_POINT = {"Delta_1": -0.88, "Delta_2": 4.0, "Delta_e": -1.0,
               "Delta_m_eff": 0.9, "J": 0.8}


def is_strictly_stable(p: SystemParams) -> bool:
    stable, max_real = check_stability(build_drift(p))
    return stable and max_real <= -MARGINAL_BAND_FRACTION * p.omega_b


def perturbed_table_params(seed: int, count: int) -> list[SystemParams]:
    """Stable parameter sets drawn around the optimized operating point with
    +/-50% uniform perturbations on detunings and the cavity coupling;
    unstable or marginal draws are discarded."""
    rng = np.random.default_rng(seed)
    base = baseline_params()
    wb = base.omega_b
    out: list[SystemParams] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count:
            raise RuntimeError("sampler failed to find enough stable points")
        factors = rng.uniform(0.5, 1.5, size=len(TABLE_POINT))
        overrides = {name: value * wb * f for (name, value), f
                     in zip(TABLE_POINT.items(), factors)}
        p = dataclasses.replace(base, **overrides)
        if is_strictly_stable(p):
            out.append(p)
    return out


def microscopic_cases(seed: int, count: int):
    """Stable microscopic-mode cases: (params, drive, eps_l, eps_m, steady).

    Drive powers and the bare magnon detuning vary; cases whose derived
    effective parameters are unstable are discarded.
    """
    rng = np.random.default_rng(seed)
    base = baseline_params()
    wb = base.omega_b
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 200 * count:
            raise RuntimeError("sampler failed to find enough stable cases")
        p = dataclasses.replace(
            base,
            Delta_1=rng.uniform(-3.0, -0.5) * wb,
            Delta_2=rng.uniform(2.0, 5.0) * wb,
            Delta_e=-wb * rng.uniform(0.5, 1.5),
        )
        drive = DriveSpec(
            P=rng.uniform(0.005, 0.05),
            omega_l=10000.0 * MHZ,
            B_0=rng.uniform(1e-5, 4e-5),
            sphere_diameter=250e-6,
            g_mb_bare=TWO_PI * 0.2,
            Delta_m_bare=rng.uniform(0.6, 1.3) * wb,
        )
        eps_l, eps_m = drive_amplitudes(drive, p.kappa_c)
        try:
            steady = solve_steady_state(p, drive, eps_l, eps_m)
        except NonConvergence:
            continue  # bistable drive regime, discarded like unstable draws
        effective = apply_steady_state(p, steady)
        if is_strictly_stable(effective):
            out.append((p, drive, eps_l, eps_m, steady))
    return out


@pytest.fixture(scope="session")
def baseline() -> SystemParams:
    return baseline_params()


@pytest.fixture(scope="session")
def no_feedback(baseline) -> SystemParams:
    return dataclasses.replace(baseline, feedback=FeedbackSpec(0.0, 0.0))
