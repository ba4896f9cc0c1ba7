"""Grid sweeps and derivative-free optimization of the entanglement landscape.

Every grid point runs the full pipeline (feedback transforms, drift and
diffusion assembly, stability check, Lyapunov solve, pair reduction) as an
independent pure function of the parameters, so points may be evaluated by
any number of workers in any order; results are assembled in grid order and
are bit-identical regardless of worker count.

Stability markers: 'stable', 'marginal' (decay margin thinner than
1e-6 * omega_b, excluded from maxima; Lyapunov conditioning is unreliable
there) and 'unstable'. Entanglement values exist only for stable points;
all other points carry NaN, which serializes to an explicit marker.
"""

from __future__ import annotations

import datetime as _dt
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np

from ._version import __version__
from .dynamics import MARGINAL_BAND_FRACTION, build_diffusion, build_drift, \
    check_stability, solve_lyapunov
from .entanglement import ModePair, log_negativity, reduce_covariance
from .errors import NoStablePoint, NumericalError
from .params import FeedbackSpec, SystemParams

STABLE = "stable"
MARGINAL = "marginal"
UNSTABLE = "unstable"


class DetuningMode(Enum):
    """How an aggregate cavity detuning axis maps onto (Delta_1, Delta_2)."""

    INDEPENDENT = "independent"
    SYMMETRIC = "symmetric"        # Delta_1 = Delta_2 = Delta_c
    ANTISYMMETRIC = "antisymmetric"  # Delta_1 = -Delta_c, Delta_2 = Delta_c


_SCALAR_FIELDS = {f.name for f in fields(SystemParams) if f.name != "feedback"}
SWEEPABLE_PARAMETERS = tuple(sorted(_SCALAR_FIELDS)) + ("r_B", "phi", "Delta_c")


@dataclass(frozen=True)
class SweepAxis:
    """One scan axis: a named parameter and an inclusive linear range.

    start/stop are in the parameter's internal units (rad/s for rates and
    detunings, kelvin for T, radians for phi, dimensionless for r_B).
    """

    parameter: str
    start: float
    stop: float
    count: int

    def __post_init__(self) -> None:
        if self.parameter not in SWEEPABLE_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if self.count < 2:
            raise ValueError("axis count must be at least 2")
        if self.start == self.stop:
            raise ValueError("axis start and stop must differ")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Entanglement values over a 1D or 2D grid, with stability markers.

    values has shape (n_points, n_pairs) with NaN at non-stable points; grids
    are row-major in the axes order. provenance records the tool version and
    a creation timestamp (in-memory only; emitted files carry just the
    version so identical runs produce identical bytes).
    """

    axes: tuple[SweepAxis, ...]
    mode: DetuningMode
    pairs: tuple[ModePair, ...]
    values: np.ndarray
    stability: tuple[str, ...]
    max_real_eig: np.ndarray
    params_snapshot: SystemParams
    provenance: dict

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    def grid_shape(self) -> tuple[int, ...]:
        return tuple(ax.count for ax in self.axes)

    def axis_columns(self) -> tuple[np.ndarray, ...]:
        """Per-point axis values in grid order (row-major)."""
        if not self.axes:
            return ()
        if len(self.axes) == 1:
            return (self.axes[0].values(),)
        v1, v2 = self.axes[0].values(), self.axes[1].values()
        return (np.repeat(v1, len(v2)), np.tile(v2, len(v1)))

    def pair_values(self, pair: ModePair) -> np.ndarray:
        return self.values[:, self.pairs.index(pair)]


def apply_parameter(base: SystemParams, name: str, value: float,
                    mode: DetuningMode = DetuningMode.INDEPENDENT) -> SystemParams:
    """New SystemParams with one named parameter replaced.

    'Delta_c' requires a symmetric or antisymmetric detuning mode; 'r_B' and
    'phi' address the feedback loop; every scalar field of SystemParams is
    addressable by its own name.
    """
    if name == "Delta_c":
        if mode is DetuningMode.SYMMETRIC:
            return replace(base, Delta_1=value, Delta_2=value)
        if mode is DetuningMode.ANTISYMMETRIC:
            return replace(base, Delta_1=-value, Delta_2=value)
        raise ValueError("a Delta_c axis requires symmetric or antisymmetric mode")
    if name == "r_B":
        return replace(base, feedback=FeedbackSpec(value, base.feedback.phi))
    if name == "phi":
        return replace(base, feedback=FeedbackSpec(base.feedback.r_B, value))
    if name in _SCALAR_FIELDS:
        return replace(base, **{name: value})
    raise ValueError(f"unknown sweep parameter {name!r}")


def evaluate_point(p: SystemParams, pairs: tuple[ModePair, ...]):
    """(status, max_real_eig, values) of the full pipeline at one point.

    Per-point numerical failures of the Lyapunov stage are recorded as
    'marginal' rather than raised: they occur only next to the stability
    boundary where the solve is ill-conditioned.
    """
    A = build_drift(p)
    stable, max_real = check_stability(A)
    if max_real >= 0.0:
        return UNSTABLE, max_real, (math.nan,) * len(pairs)
    if max_real > -MARGINAL_BAND_FRACTION * p.omega_b:
        return MARGINAL, max_real, (math.nan,) * len(pairs)
    try:
        C = solve_lyapunov(A, build_diffusion(p))
        values = tuple(log_negativity(reduce_covariance(C, pair), pair).E_N
                       for pair in pairs)
    except NumericalError:
        return MARGINAL, max_real, (math.nan,) * len(pairs)
    return STABLE, max_real, values


def _point_task(args):
    return evaluate_point(*args)


def _run_points(points: list[SystemParams], pairs: tuple[ModePair, ...],
                workers: int):
    tasks = [(p, pairs) for p in points]
    if workers <= 1:
        return [_point_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_task, tasks, chunksize=chunk))


def _assemble(base, axes, mode, pairs, outcomes) -> SweepResult:
    values = np.array([v for _, _, v in outcomes], dtype=float)
    stability = tuple(s for s, _, _ in outcomes)
    max_real = np.array([m for _, m, _ in outcomes], dtype=float)
    provenance = {
        "tool": "magnomech",
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return SweepResult(axes=tuple(axes), mode=mode, pairs=tuple(pairs),
                       values=values, stability=stability, max_real_eig=max_real,
                       params_snapshot=base, provenance=provenance)


def _grid_points(base, axes, mode) -> list[SystemParams]:
    if len(axes) == 2 and axes[0].parameter == axes[1].parameter:
        raise ValueError("2D sweep axes must reference distinct parameters")
    points = []
    for combo in itertools.product(*(ax.values() for ax in axes)):
        p = base
        for ax, value in zip(axes, combo):
            p = apply_parameter(p, ax.parameter, float(value), mode)
        points.append(p)
    return points


def sweep_2d(base: SystemParams, ax1: SweepAxis, ax2: SweepAxis,
             mode: DetuningMode = DetuningMode.INDEPENDENT,
             pairs: tuple[ModePair, ...] = (), *, workers: int = 1) -> SweepResult:
    """Evaluate the entanglement of the given pairs over a 2D grid."""
    if not pairs:
        raise ValueError("at least one mode pair is required")
    axes = (ax1, ax2)
    outcomes = _run_points(_grid_points(base, axes, mode), tuple(pairs), workers)
    return _assemble(base, axes, mode, tuple(pairs), outcomes)


def sweep_1d(base: SystemParams, ax: SweepAxis,
             mode: DetuningMode = DetuningMode.INDEPENDENT,
             pairs: tuple[ModePair, ...] = (), *, workers: int = 1) -> SweepResult:
    """Evaluate the entanglement of the given pairs along one axis."""
    if not pairs:
        raise ValueError("at least one mode pair is required")
    outcomes = _run_points(_grid_points(base, (ax,), mode), tuple(pairs), workers)
    return _assemble(base, (ax,), mode, tuple(pairs), outcomes)


def scan_feedback(base: SystemParams, r_axis: SweepAxis, phi_axis: SweepAxis,
                  pairs: tuple[ModePair, ...] = (), *, workers: int = 1) -> SweepResult:
    """2D scan over the feedback reflectivity and phase."""
    if r_axis.parameter != "r_B" or phi_axis.parameter != "phi":
        raise ValueError("scan_feedback expects an r_B axis and a phi axis")
    if not (0.0 <= r_axis.start < 1.0 and 0.0 <= r_axis.stop < 1.0):
        raise ValueError("r_B axis must stay within [0, 1)")
    return sweep_2d(base, r_axis, phi_axis, DetuningMode.INDEPENDENT, pairs,
                    workers=workers)


# Coarse-stage grid points per free parameter, by dimensionality.
_COARSE_COUNTS = {1: 101, 2: 41, 3: 13, 4: 7, 5: 6}


def optimize_entanglement(base: SystemParams, free_params: list[str],
                          bounds: list[tuple[float, float]], pair: ModePair,
                          *, mode: DetuningMode = DetuningMode.INDEPENDENT,
                          workers: int = 1, step_tol_fraction: float = 1e-3,
                          max_polls: int = 10_000) -> tuple[SystemParams, float]:
    """Maximize one pair's entanglement over a bounded box of parameters.

    Deterministic coarse-to-fine search: a full coarse grid locates the best
    basin, then a compass pattern search (poll +/- one step per coordinate,
    move on strict improvement, otherwise halve the steps) refines it until
    every step drops below step_tol_fraction of its bound span. Non-stable
    points never become incumbents. Raises NoStablePoint when the coarse
    stage finds no stable point at all.
    """
    n = len(free_params)
    if not 1 <= n <= 5:
        raise ValueError("between 1 and 5 free parameters are supported")
    if len(bounds) != n:
        raise ValueError("bounds must match free_params in length")
    for name, (lo, hi) in zip(free_params, bounds):
        if not lo < hi:
            raise ValueError(f"empty bounds for {name!r}")

    def params_at(x: tuple[float, ...]) -> SystemParams:
        p = base
        for name, value in zip(free_params, x):
            p = apply_parameter(p, name, value, mode)
        return p

    def objective(x: tuple[float, ...]) -> float:
        status, _, values = evaluate_point(params_at(x), (pair,))
        return values[0] if status == STABLE else -math.inf

    count = _COARSE_COUNTS[n]
    grids = [np.linspace(lo, hi, count) for lo, hi in bounds]
    coarse = [tuple(float(v) for v in combo)
              for combo in itertools.product(*grids)]
    outcomes = _run_points([params_at(x) for x in coarse], (pair,), workers)
    best_value = -math.inf
    best_x = None
    for x, (status, _, values) in zip(coarse, outcomes):
        if status == STABLE and values[0] > best_value:
            best_value, best_x = values[0], x
    if best_x is None:
        raise NoStablePoint("no stable point on the coarse grid")

    spans = [hi - lo for lo, hi in bounds]
    steps = [(hi - lo) / (count - 1) for lo, hi in bounds]
    polls = 0
    while max(s / span for s, span in zip(steps, spans)) > step_tol_fraction:
        candidate_value, candidate_x = best_value, None
        for i in range(n):
            for sign in (1.0, -1.0):
                lo, hi = bounds[i]
                xi = min(max(best_x[i] + sign * steps[i], lo), hi)
                if xi == best_x[i]:
                    continue
                x = best_x[:i] + (xi,) + best_x[i + 1:]
                value = objective(x)
                polls += 1
                if value > candidate_value:
                    candidate_value, candidate_x = value, x
        if candidate_x is None:
            steps = [0.5 * s for s in steps]
        else:
            best_value, best_x = candidate_value, candidate_x
        if polls > max_polls:
            break
    return params_at(best_x), best_value


def evaluate_single(base: SystemParams,
                    pairs: tuple[ModePair, ...]) -> SweepResult:
    """Degenerate sweep of a single point, for uniform serialization."""
    outcome = evaluate_point(base, tuple(pairs))
    return _assemble(base, (), DetuningMode.INDEPENDENT, tuple(pairs), [outcome])
