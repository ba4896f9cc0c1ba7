"""Parameter records and the nonlinear operating point of the coupled-cavity model.

Every rate, coupling, detuning and frequency is stored internally as an
angular frequency in rad/s; temperatures are in kelvin. Configuration files
quote frequencies divided by 2*pi (see :mod:`magnomech.io`) and are converted
exactly once at load time.

The five modes are labelled c1 (driven cavity), c2 (second cavity), m
(magnon), b (mechanical mode with quadratures q, p) and e (collective
ensemble mode). Cavity 1 carries a beam-splitter feedback loop that rescales
its effective decay rate, detuning and input-noise strength; those three
transforms are defined here so every consumer derives them from one place.

Two entry paths coexist:

* effective mode: the caller supplies the effective magnon detuning
  ``Delta_m_eff`` and the effective magnomechanical coupling ``G_mb``
  directly in :class:`SystemParams`;
* microscopic mode: the caller supplies a :class:`DriveSpec`, and
  :func:`solve_steady_state` derives both quantities from the drive powers
  via the nonlinear operating-point equations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import constants as _sc

from .errors import NonConvergence

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # rad/s per "frequency/2pi in MHz", the configuration unit


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants used by the thermal and drive formulas.

    gamma_gyro is the gyromagnetic ratio of the ferrimagnetic sphere in
    rad/s per tesla; spin_density is its spin number density in 1/m^3.
    """

    hbar: float = _sc.hbar
    k_B: float = _sc.k
    gamma_gyro: float = TWO_PI * 28e9
    spin_density: float = 4.22e27

    def __post_init__(self) -> None:
        for name in ("hbar", "k_B", "gamma_gyro", "spin_density"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class FeedbackSpec:
    """Beam-splitter feedback settings: reflectivity r_B and phase phi.

    The transmissivity t_B = sqrt(1 - r_B^2) is derived, so
    r_B^2 + t_B^2 = 1 holds to machine precision by construction.
    The phase is normalized into [0, 2*pi); all uses are periodic.
    """

    r_B: float = 0.0
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_B <= 1.0:
            raise ValueError(f"r_B must lie in [0, 1], got {self.r_B}")
        object.__setattr__(self, "phi", self.phi % TWO_PI)

    @property
    def t_B(self) -> float:
        return math.sqrt(1.0 - self.r_B**2)


@dataclass(frozen=True)
class SystemParams:
    """One operating point of the five-mode system (angular units, rad/s).

    kappa_c applies to both cavities; omega_c1, omega_c2 and omega_m are the
    carrier frequencies that set the thermal occupations of the respective
    baths. Delta_m_eff is the effective magnon detuning (including the static
    mechanical shift) and G_mb the effective magnomechanical coupling, taken
    real and non-negative.
    """

    kappa_c: float
    kappa_m: float
    gamma_e: float
    gamma_b: float
    omega_b: float
    Delta_1: float
    Delta_2: float
    Delta_e: float
    Delta_m_eff: float
    g_mc: float
    G_mb: float
    G_ce: float
    J: float
    T: float
    omega_c1: float
    omega_c2: float
    omega_m: float
    feedback: FeedbackSpec = FeedbackSpec()

    def __post_init__(self) -> None:
        for name in ("kappa_c", "kappa_m", "gamma_e", "gamma_b", "omega_b",
                     "omega_c1", "omega_c2", "omega_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.G_mb < 0:
            raise ValueError("G_mb must be non-negative (real magnitude convention)")


@dataclass(frozen=True)
class DriveSpec:
    """Microscopic drive settings for deriving the effective parameters.

    P is the cavity drive power in watts, omega_l its angular frequency,
    B_0 the magnetic drive amplitude in tesla. g_mb_bare is the bare
    single-excitation magnomechanical coupling and Delta_m_bare the bare
    magnon detuning, both in rad/s.
    """

    P: float
    omega_l: float
    B_0: float
    sphere_diameter: float
    g_mb_bare: float
    Delta_m_bare: float

    def __post_init__(self) -> None:
        if self.P < 0:
            raise ValueError("P must be non-negative")
        if self.B_0 < 0:
            raise ValueError("B_0 must be non-negative")
        if self.sphere_diameter <= 0:
            raise ValueError("sphere_diameter must be strictly positive")
        if self.omega_l <= 0:
            raise ValueError("omega_l must be strictly positive")
        if self.g_mb_bare < 0:
            raise ValueError("g_mb_bare must be non-negative")


@dataclass(frozen=True)
class SteadyState:
    """Self-consistent mean amplitudes of the driven system.

    c1s, c2s, es, ms are complex mode amplitudes; qs is the static
    dimensionless mechanical displacement. Delta_m_eff_out and G_mb_out are
    the derived effective magnon detuning and magnomechanical coupling.
    residual is the norm of the mean-field flow at the solution, normalized
    by max(|eps_l|, |eps_m|, 1).
    """

    c1s: complex
    c2s: complex
    es: complex
    ms: complex
    qs: float
    Delta_m_eff_out: float
    G_mb_out: float
    converged: bool
    residual: float


def feedback_decay(kappa_c: float, fb: FeedbackSpec) -> float:
    """Effective decay rate of the fed-back cavity: kappa_c (1 - 2 r_B cos phi).

    May be zero or negative under strongly constructive feedback; such values
    are passed through unchanged because stability is decided from the full
    drift spectrum, not from this single diagonal entry.
    """
    if kappa_c <= 0:
        raise ValueError("kappa_c must be strictly positive")
    return kappa_c * (1.0 - 2.0 * fb.r_B * math.cos(fb.phi))


def feedback_detuning(Delta_1: float, kappa_c: float, fb: FeedbackSpec) -> float:
    """Effective detuning of the fed-back cavity: Delta_1 - 2 kappa_c r_B sin phi."""
    if kappa_c <= 0:
        raise ValueError("kappa_c must be strictly positive")
    return Delta_1 - 2.0 * kappa_c * fb.r_B * math.sin(fb.phi)


def feedback_noise_factor(fb: FeedbackSpec) -> float:
    """Input-noise rescaling t_B^2 |1 - r_B e^{i phi}|^2, in real arithmetic."""
    return fb.t_B**2 * (1.0 - 2.0 * fb.r_B * math.cos(fb.phi) + fb.r_B**2)


def thermal_occupation(omega: float, T: float,
                       consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Bose-Einstein occupation 1 / (exp(hbar omega / k_B T) - 1).

    Returns exactly 0 at T = 0 (taken as a limit, never a division).
    """
    if omega <= 0:
        raise ValueError("omega must be strictly positive")
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0.0:
        return 0.0
    x = consts.hbar * omega / (consts.k_B * T)
    if x > 700.0:  # exp overflow guard; occupation underflows to 0 long before
        return 0.0
    return 1.0 / math.expm1(x)


def drive_amplitudes(d: DriveSpec, kappa_c: float,
                     consts: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[float, float]:
    """Drive amplitudes (eps_l, eps_m) in rad/s from the microscopic settings.

    eps_l = sqrt(2 P kappa_c / (hbar omega_l)) for the cavity drive and
    eps_m = (5/4) gamma sqrt(rho V) B_0 for the magnetic drive, with the
    sphere volume V = (pi/6) diameter^3.
    """
    if kappa_c <= 0:
        raise ValueError("kappa_c must be strictly positive")
    eps_l = math.sqrt(2.0 * d.P * kappa_c / (consts.hbar * d.omega_l))
    volume = math.pi / 6.0 * d.sphere_diameter**3
    n_spins = consts.spin_density * volume
    eps_m = 1.25 * consts.gamma_gyro * math.sqrt(n_spins) * d.B_0
    return eps_l, eps_m


def mean_amplitude_rhs(p: SystemParams, d: DriveSpec, eps_l: float, eps_m: float,
                       c1: complex, c2: complex, e: complex, m: complex,
                       q: float, mom: float):
    """Noise-free mean-field flow of the five mode amplitudes.

    Returns (dc1, dc2, de, dm, dq, dp). The magnon equation uses the bare
    detuning and bare coupling from ``d``; the static shift emerges from the
    m*q term.
    """
    fb = p.feedback
    kappa_fb = feedback_decay(p.kappa_c, fb)
    Delta_fb = feedback_detuning(p.Delta_1, p.kappa_c, fb)
    dc1 = -(kappa_fb + 1j * Delta_fb) * c1 - 1j * p.G_ce * e - 1j * p.J * c2 \
        + fb.t_B * eps_l
    dc2 = -(p.kappa_c + 1j * p.Delta_2) * c2 - 1j * p.J * c1 - 1j * p.g_mc * m
    de = -(p.gamma_e + 1j * p.Delta_e) * e - 1j * p.G_ce * c1
    dm = -(p.kappa_m + 1j * d.Delta_m_bare) * m - 1j * p.g_mc * c2 \
        - 1j * d.g_mb_bare * m * q + eps_m
    dq = p.omega_b * mom
    dp = -p.omega_b * q - p.gamma_b * mom - d.g_mb_bare * abs(m) ** 2
    return dc1, dc2, de, dm, dq, dp


def _amplitudes_at(p: SystemParams, d: DriveSpec, eps_l: float, eps_m: float,
                   qs: float) -> np.ndarray:
    """Exact linear solve for (c1s, c2s, es, ms) at frozen displacement qs."""
    fb = p.feedback
    kappa_fb = feedback_decay(p.kappa_c, fb)
    Delta_fb = feedback_detuning(p.Delta_1, p.kappa_c, fb)
    Delta_m = d.Delta_m_bare + d.g_mb_bare * qs
    M = np.array([
        [kappa_fb + 1j * Delta_fb, 1j * p.J, 1j * p.G_ce, 0.0],
        [1j * p.J, p.kappa_c + 1j * p.Delta_2, 0.0, 1j * p.g_mc],
        [1j * p.G_ce, 0.0, p.gamma_e + 1j * p.Delta_e, 0.0],
        [0.0, 1j * p.g_mc, 0.0, p.kappa_m + 1j * Delta_m],
    ], dtype=complex)
    rhs = np.array([fb.t_B * eps_l, 0.0, 0.0, eps_m], dtype=complex)
    return np.linalg.solve(M, rhs)


def steady_state_residual(p: SystemParams, d: DriveSpec, eps_l: float,
                          eps_m: float, ss: "SteadyState") -> float:
    """Norm of the mean-field flow at a candidate operating point,
    normalized by max(|eps_l|, |eps_m|, 1)."""
    dc1, dc2, de, dm, dq, dp = mean_amplitude_rhs(
        p, d, eps_l, eps_m, ss.c1s, ss.c2s, ss.es, ss.ms, ss.qs, 0.0)
    mag = math.sqrt(abs(dc1) ** 2 + abs(dc2) ** 2 + abs(de) ** 2
                    + abs(dm) ** 2 + dq ** 2 + dp ** 2)
    return mag / max(abs(eps_l), abs(eps_m), 1.0)


def solve_steady_state(p: SystemParams, d: DriveSpec, eps_l: float, eps_m: float,
                       *, rel_tol: float = 1e-12, max_iter: int = 10_000,
                       relaxation: float = 0.5) -> SteadyState:
    """Self-consistent operating point of the driven nonlinear system.

    For a frozen displacement qs the four amplitude equations are linear and
    solved exactly; qs = -(g_mb_bare / omega_b) |ms|^2 then closes a scalar
    fixed-point loop on the effective magnon detuning. The loop is damped
    (relaxation 0.5) to avoid period-2 cycles near bistability.

    Raises NonConvergence when the iteration budget is exhausted, which
    signals a bistable or runaway drive regime.
    """
    qs = 0.0
    converged = False
    for _ in range(max_iter):
        try:
            _, _, _, ms = _amplitudes_at(p, d, eps_l, eps_m, qs)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"singular amplitude system at qs={qs!r}") from exc
        q_next = -(d.g_mb_bare / p.omega_b) * abs(ms) ** 2
        if abs(q_next - qs) <= rel_tol * max(abs(q_next), 1.0):
            qs = q_next
            converged = True
            break
        qs = qs + relaxation * (q_next - qs)
    if not converged:
        raise NonConvergence(
            f"operating-point iteration did not converge in {max_iter} steps")
    c1s, c2s, es, ms = _amplitudes_at(p, d, eps_l, eps_m, qs)
    state = SteadyState(
        c1s=complex(c1s), c2s=complex(c2s), es=complex(es), ms=complex(ms),
        qs=qs,
        Delta_m_eff_out=d.Delta_m_bare + d.g_mb_bare * qs,
        G_mb_out=math.sqrt(2.0) * d.g_mb_bare * abs(ms),
        converged=True, residual=0.0)
    return replace(state, residual=steady_state_residual(p, d, eps_l, eps_m, state))


def apply_steady_state(p: SystemParams, ss: SteadyState) -> SystemParams:
    """SystemParams with the derived effective magnon detuning and coupling."""
    return replace(p, Delta_m_eff=ss.Delta_m_eff_out, G_mb=ss.G_mb_out)


def low_excitation_ratios(p: SystemParams, ss: SteadyState) -> tuple[float, float]:
    """Diagnostic ratios (G_ce^2 / (Delta_e^2 + gamma_e^2), 1 / |c1s|^2).

    Reported for inspection of the low-excitation regime in microscopic mode;
    no parameters are rejected on their basis.
    """
    coupling_ratio = p.G_ce**2 / (p.Delta_e**2 + p.gamma_e**2)
    occ = abs(ss.c1s) ** 2
    return coupling_ratio, (math.inf if occ == 0.0 else 1.0 / occ)


def steady_amplitude_phase_gauge(ss: SteadyState) -> float:
    """Global phase rotation that makes the magnon amplitude negative-imaginary.

    Rotating all four bosonic amplitudes by this common angle is a pure gauge
    choice (the drive phases rotate with them); in that gauge the linearized
    magnomechanical coupling is the real magnitude G_mb_out, matching the
    drift-matrix convention. Entanglement is invariant under the rotation.
    """
    return -0.5 * math.pi - cmath.phase(ss.ms)
