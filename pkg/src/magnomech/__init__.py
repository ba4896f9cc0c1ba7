"""Steady-state simulator for a feedback-assisted pair of coupled microwave
cavities hosting an atomic ensemble and a magnomechanical sphere.

The pipeline: parameter records and feedback transforms (:mod:`.params`),
drift/diffusion assembly, stability and the Lyapunov covariance with
time-domain oracles (:mod:`.dynamics`), two-mode logarithmic negativity
(:mod:`.entanglement`), grid sweeps and bounded optimization (:mod:`.sweep`),
bundled figure presets (:mod:`.presets`) and the configuration/serialization
layer plus CLI (:mod:`.io`, :mod:`.cli`).
"""

from ._version import __version__
from .dynamics import (DriftDiffusion, MODES, QUADRATURES, build_diffusion,
                       build_drift, check_stability, drift_diffusion,
                       integrate_covariance_ode, integrate_mean_field,
                       mean_field_jacobian, physicality_margin, solve_lyapunov,
                       symplectic_form)
from .entanglement import (PAIRS, EntanglementResult, ModePair,
                           all_pairs_entanglement, log_negativity,
                           pair_from_label, reduce_covariance)
from .errors import (ConfigError, Divergence, EigenFailure, MagnomechError,
                     NoStablePoint, NonConvergence, NumericalError, ParseError,
                     SingularSystem, UnknownKeyError, UnphysicalInput, Unstable,
                     ValidationError)
from .io import (RunConfig, default_config, dump_config, emit_results,
                 load_config, run_figure_preset)
from .params import (DEFAULT_CONSTANTS, DriveSpec, FeedbackSpec,
                     PhysicalConstants, SteadyState, SystemParams,
                     apply_steady_state, drive_amplitudes, feedback_decay,
                     feedback_detuning, feedback_noise_factor,
                     low_excitation_ratios, solve_steady_state,
                     thermal_occupation)
from .presets import PRESET_NAMES, PRESETS, baseline_params
from .sweep import (DetuningMode, SweepAxis, SweepResult, apply_parameter,
                    evaluate_point, evaluate_single, optimize_entanglement,
                    scan_feedback, sweep_1d, sweep_2d)

__all__ = [
    "__version__",
    # params
    "PhysicalConstants", "DEFAULT_CONSTANTS", "FeedbackSpec", "SystemParams",
    "DriveSpec", "SteadyState", "feedback_decay", "feedback_detuning",
    "feedback_noise_factor", "thermal_occupation", "drive_amplitudes",
    "solve_steady_state", "apply_steady_state", "low_excitation_ratios",
    # dynamics
    "MODES", "QUADRATURES", "DriftDiffusion", "build_drift", "build_diffusion",
    "check_stability", "drift_diffusion", "solve_lyapunov",
    "integrate_covariance_ode", "integrate_mean_field", "mean_field_jacobian",
    "symplectic_form", "physicality_margin",
    # entanglement
    "ModePair", "PAIRS", "EntanglementResult", "pair_from_label",
    "reduce_covariance", "log_negativity", "all_pairs_entanglement",
    # sweep
    "DetuningMode", "SweepAxis", "SweepResult", "apply_parameter",
    "evaluate_point", "evaluate_single", "sweep_1d", "sweep_2d",
    "scan_feedback", "optimize_entanglement",
    # presets / io
    "PRESETS", "PRESET_NAMES", "baseline_params", "RunConfig", "load_config",
    "dump_config", "default_config", "emit_results", "run_figure_preset",
    # errors
    "MagnomechError", "NumericalError", "NonConvergence", "EigenFailure",
    "Unstable", "SingularSystem", "Divergence", "UnphysicalInput",
    "NoStablePoint", "ConfigError", "ParseError", "ValidationError",
    "UnknownKeyError",
]
