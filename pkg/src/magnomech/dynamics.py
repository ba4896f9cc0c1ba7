"""Linearized quadrature dynamics: drift and diffusion matrices, stability,
steady-state covariance, and brute-force time-domain oracles.

The shared mode ordering is (c1, c2, m, b, e) with two quadrature rows per
mode, giving the 10-component state
(A_c1, B_c1, A_c2, B_c2, A_m, B_m, q, p, A_e, B_e)
where A_o = (o + o^dag)/sqrt(2) and B_o = i(o^dag - o)/sqrt(2). All
downstream indexing (covariance reduction, entanglement pairs, output
labels) derives from the constants defined here.

Covariance normalization: vacuum diagonal is 1/2. A single decoupled mode at
zero detuning then equilibrates to ((2W + 1)/2) I with W its bath occupation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from .errors import Divergence, EigenFailure, SingularSystem, Unstable
from .params import (DEFAULT_CONSTANTS, DriveSpec, PhysicalConstants,
                     SteadyState, SystemParams, feedback_decay,
                     feedback_detuning, feedback_noise_factor,
                     mean_amplitude_rhs, steady_amplitude_phase_gauge,
                     steady_state_residual, thermal_occupation)

MODES: tuple[str, ...] = ("c1", "c2", "m", "b", "e")
QUADRATURES: tuple[str, ...] = ("A_c1", "B_c1", "A_c2", "B_c2", "A_m", "B_m",
                                "q", "p", "A_e", "B_e")
MODE_INDICES: dict[str, tuple[int, int]] = {
    mode: (2 * k, 2 * k + 1) for k, mode in enumerate(MODES)
}

N_QUAD = 10

# Residual bound for the Lyapunov solve, relative to the largest diffusion entry.
LYAPUNOV_RESIDUAL_TOL = 1e-10

# Stable points with a decay margin thinner than this fraction of omega_b are
# treated as marginal by sweeps: Lyapunov conditioning degrades at the boundary.
MARGINAL_BAND_FRACTION = 1e-6


@dataclass(frozen=True, eq=False)
class DriftDiffusion:
    """Drift matrix A, diagonal diffusion matrix D and the stability verdict."""

    A: np.ndarray
    D: np.ndarray
    stable: bool
    max_real_eig: float
    mode_order: tuple[str, ...] = QUADRATURES


def build_drift(p: SystemParams) -> np.ndarray:
    """10x10 drift matrix of the linearized quadrature dynamics (rad/s).

    Cavity 1 appears with its feedback-rescaled decay rate and detuning. The
    magnomechanical coupling enters as the real magnitude G_mb in the gauge
    where the magnon steady amplitude is negative-imaginary.
    """
    fb = p.feedback
    k_fb = feedback_decay(p.kappa_c, fb)
    d_fb = feedback_detuning(p.Delta_1, p.kappa_c, fb)
    k_c, k_m, g_e, g_b = p.kappa_c, p.kappa_m, p.gamma_e, p.gamma_b
    d2, de, dm, wb = p.Delta_2, p.Delta_e, p.Delta_m_eff, p.omega_b
    j, gmc, gmb, gce = p.J, p.g_mc, p.G_mb, p.G_ce
    return np.array([
        [-k_fb,  d_fb,  0.0,   j,     0.0,   0.0,   0.0,   0.0,  0.0,   gce],
        [-d_fb, -k_fb, -j,     0.0,   0.0,   0.0,   0.0,   0.0, -gce,   0.0],
        [0.0,    j,    -k_c,   d2,    0.0,   gmc,   0.0,   0.0,  0.0,   0.0],
        [-j,     0.0,  -d2,   -k_c,  -gmc,   0.0,   0.0,   0.0,  0.0,   0.0],
        [0.0,    0.0,   0.0,   gmc,  -k_m,   dm,   -gmb,   0.0,  0.0,   0.0],
        [0.0,    0.0,  -gmc,   0.0,  -dm,   -k_m,   0.0,   0.0,  0.0,   0.0],
        [0.0,    0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   wb,   0.0,   0.0],
        [0.0,    0.0,   0.0,   0.0,   0.0,   gmb,  -wb,   -g_b,  0.0,   0.0],
        [0.0,    gce,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0, -g_e,   de],
        [-gce,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0, -de,   -g_e],
    ])


def build_diffusion(p: SystemParams,
                    consts: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Diagonal diffusion matrix of the input noises (rad/s).

    The feedback loop rescales only the cavity-1 rows by
    t_B^2 |1 - r_B e^{i phi}|^2; the q row carries no noise.
    """
    w_c1 = thermal_occupation(p.omega_c1, p.T, consts)
    w_c2 = thermal_occupation(p.omega_c2, p.T, consts)
    w_m = thermal_occupation(p.omega_m, p.T, consts)
    w_b = thermal_occupation(p.omega_b, p.T, consts)
    cfl = feedback_noise_factor(p.feedback)
    d_c1 = p.kappa_c * cfl * (2.0 * w_c1 + 1.0)
    d_c2 = p.kappa_c * (2.0 * w_c2 + 1.0)
    d_m = p.kappa_m * (2.0 * w_m + 1.0)
    return np.diag([d_c1, d_c1, d_c2, d_c2, d_m, d_m,
                    0.0, p.gamma_b * (2.0 * w_b + 1.0),
                    p.gamma_e, p.gamma_e])


def check_stability(A: np.ndarray) -> tuple[bool, float]:
    """(stable, max_real_eig): stable iff every drift eigenvalue decays.

    Implemented through the eigenvalue spectrum, which is equivalent to the
    classical determinant criterion and robust at this matrix size.
    """
    if not np.all(np.isfinite(A)):
        raise EigenFailure("drift matrix contains non-finite entries")
    try:
        eigenvalues = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure("eigenvalue iteration did not converge") from exc
    max_real = float(eigenvalues.real.max())
    return max_real < 0.0, max_real


def drift_diffusion(p: SystemParams,
                    consts: PhysicalConstants = DEFAULT_CONSTANTS) -> DriftDiffusion:
    """Assemble drift, diffusion and stability verdict for one operating point."""
    A = build_drift(p)
    stable, max_real = check_stability(A)
    return DriftDiffusion(A=A, D=build_diffusion(p, consts), stable=stable,
                          max_real_eig=max_real)


def solve_lyapunov(A: np.ndarray, D: np.ndarray,
                   *, residual_tol: float = LYAPUNOV_RESIDUAL_TOL) -> np.ndarray:
    """Steady-state covariance C solving A C + C A^T + D = 0.

    Requires a strictly stable drift matrix. Solved by Schur-decomposition
    back-substitution on a rescaled system; the result is symmetrized and the
    residual checked against residual_tol * max|D|.
    """
    stable, max_real = check_stability(A)
    if not stable:
        raise Unstable(f"drift matrix is not stable (max Re eig = {max_real:.3e})")
    scale = float(np.abs(A).max()) or 1.0
    try:
        C = sla.solve_continuous_lyapunov(A / scale, -D / scale)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("Lyapunov solve failed (near-marginal spectrum)") from exc
    if not np.all(np.isfinite(C)):
        raise SingularSystem("Lyapunov solve produced non-finite covariance")
    C = 0.5 * (C + C.T)
    residual = float(np.abs(A @ C + C @ A.T + D).max())
    if residual > residual_tol * float(np.abs(D).max()):
        raise SingularSystem(
            f"Lyapunov residual {residual:.3e} exceeds tolerance "
            f"(near-marginal stability)")
    return C


def integrate_covariance_ode(A: np.ndarray, D: np.ndarray,
                             C0: np.ndarray | None = None,
                             t_end: float | None = None,
                             dt: float | None = None,
                             *, overflow_limit: float = 1e30) -> np.ndarray:
    """Brute-force oracle: integrate dC/dt = A C + C A^T + D with fixed-step
    classical fourth-order Runge-Kutta.

    For stable A the iteration converges to the Lyapunov solution regardless
    of C0 (the equilibrium is preserved exactly by any Runge-Kutta step).
    Defaults: t_end = 20 / |max Re eig| and dt = 0.5 / max|eig|, which keeps
    every eigenvalue pair inside the stability region of the scheme. Raises
    Divergence when the iterate exceeds overflow_limit, signalling either an
    unstable drift matrix or a too-large step.
    """
    if t_end is None or dt is None:
        try:
            eigenvalues = np.linalg.eigvals(A)
        except np.linalg.LinAlgError as exc:
            raise EigenFailure("eigenvalue iteration did not converge") from exc
        max_real = float(eigenvalues.real.max())
        if t_end is None:
            if max_real >= 0.0:
                raise Divergence(
                    "cannot derive a horizon for an unstable drift matrix; "
                    "pass t_end explicitly")
            t_end = 20.0 / abs(max_real)
        if dt is None:
            dt = 0.5 / float(np.abs(eigenvalues).max())
    if dt <= 0 or t_end <= 0:
        raise ValueError("t_end and dt must be strictly positive")
    C = np.zeros_like(D) if C0 is None else np.array(C0, dtype=float)
    At = A.T
    steps = max(1, int(math.ceil(t_end / dt)))

    def rhs(X: np.ndarray) -> np.ndarray:
        return A @ X + X @ At + D

    for step in range(steps):
        k1 = rhs(C)
        k2 = rhs(C + 0.5 * dt * k1)
        k3 = rhs(C + 0.5 * dt * k2)
        k4 = rhs(C + dt * k3)
        C = C + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % 64 == 0 and not np.abs(C).max() < overflow_limit:
            raise Divergence("covariance integration exceeded overflow guard")
    if not np.abs(C).max() < overflow_limit:
        raise Divergence("covariance integration exceeded overflow guard")
    return 0.5 * (C + C.T)


def quadratures_from_amplitudes(c1: complex, c2: complex, m: complex, e: complex,
                                q: float, mom: float) -> np.ndarray:
    """Pack mean amplitudes into the shared 10-component quadrature vector."""
    root2 = math.sqrt(2.0)
    return np.array([
        root2 * c1.real, root2 * c1.imag,
        root2 * c2.real, root2 * c2.imag,
        root2 * m.real, root2 * m.imag,
        q, mom,
        root2 * e.real, root2 * e.imag,
    ])


def amplitudes_from_quadratures(y: np.ndarray):
    """Inverse of :func:`quadratures_from_amplitudes`."""
    root2 = math.sqrt(2.0)
    c1 = (y[0] + 1j * y[1]) / root2
    c2 = (y[2] + 1j * y[3]) / root2
    m = (y[4] + 1j * y[5]) / root2
    e = (y[8] + 1j * y[9]) / root2
    return c1, c2, m, e, float(y[6]), float(y[7])


def mean_field_quadrature_rhs(p: SystemParams, d: DriveSpec, eps_l: float,
                              eps_m: float, y: np.ndarray) -> np.ndarray:
    """Nonlinear mean-field flow expressed in quadrature coordinates."""
    c1, c2, m, e, q, mom = amplitudes_from_quadratures(y)
    dc1, dc2, de, dm, dq, dp = mean_amplitude_rhs(
        p, d, eps_l, eps_m, c1, c2, e, m, q, mom)
    return quadratures_from_amplitudes(dc1, dc2, dm, de, dq, dp)


def integrate_mean_field(p: SystemParams, d: DriveSpec, eps_l: float, eps_m: float,
                         y0: np.ndarray | None, t_end: float, dt: float,
                         *, overflow_limit: float = 1e30,
                         converged_tol: float = 1e-9) -> SteadyState:
    """Integrate the noise-free nonlinear mean-field flow to its fixed point.

    y0 is a 10-component quadrature vector (zeros when None). The end state is
    reported as a SteadyState; converged is set from the same normalized
    residual used by the algebraic solver.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("t_end and dt must be strictly positive")
    y = np.zeros(N_QUAD) if y0 is None else np.array(y0, dtype=float)
    steps = max(1, int(math.ceil(t_end / dt)))
    for step in range(steps):
        k1 = mean_field_quadrature_rhs(p, d, eps_l, eps_m, y)
        k2 = mean_field_quadrature_rhs(p, d, eps_l, eps_m, y + 0.5 * dt * k1)
        k3 = mean_field_quadrature_rhs(p, d, eps_l, eps_m, y + 0.5 * dt * k2)
        k4 = mean_field_quadrature_rhs(p, d, eps_l, eps_m, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % 64 == 0 and not np.abs(y).max() < overflow_limit:
            raise Divergence("mean-field integration exceeded overflow guard")
    if not np.abs(y).max() < overflow_limit:
        raise Divergence("mean-field integration exceeded overflow guard")
    c1, c2, m, e, q, _ = amplitudes_from_quadratures(y)
    state = SteadyState(
        c1s=c1, c2s=c2, es=e, ms=m, qs=q,
        Delta_m_eff_out=d.Delta_m_bare + d.g_mb_bare * q,
        G_mb_out=math.sqrt(2.0) * d.g_mb_bare * abs(m),
        converged=False, residual=0.0)
    residual = steady_state_residual(p, d, eps_l, eps_m, state)
    return replace(state, residual=residual, converged=residual <= converged_tol)


def steady_state_quadratures(ss: SteadyState) -> np.ndarray:
    """Quadrature vector of the operating point in the real-coupling gauge.

    All four bosonic amplitudes are rotated by the common phase from
    :func:`magnomech.params.steady_amplitude_phase_gauge`, under which the
    drift matrix built from the derived effective parameters is exactly the
    Jacobian of the mean-field flow at this point.
    """
    rot = np.exp(1j * steady_amplitude_phase_gauge(ss))
    return quadratures_from_amplitudes(ss.c1s * rot, ss.c2s * rot, ss.ms * rot,
                                       ss.es * rot, ss.qs, 0.0)


def mean_field_jacobian(p: SystemParams, d: DriveSpec, ss: SteadyState,
                        *, step_scale: float = 1e-3) -> np.ndarray:
    """Finite-difference Jacobian of the mean-field flow at the operating point.

    Central differences in the real-coupling gauge; the flow is quadratic in
    the state, so the central stencil has no truncation error and the step
    only balances round-off. Drive constants cancel in the differences.
    """
    y0 = steady_state_quadratures(ss)
    h = step_scale * max(float(np.abs(y0).max()), 1.0)
    jac = np.empty((N_QUAD, N_QUAD))
    for j in range(N_QUAD):
        y_plus = y0.copy()
        y_minus = y0.copy()
        y_plus[j] += h
        y_minus[j] -= h
        jac[:, j] = (mean_field_quadrature_rhs(p, d, 0.0, 0.0, y_plus)
                     - mean_field_quadrature_rhs(p, d, 0.0, 0.0, y_minus)) / (2.0 * h)
    return jac


def symplectic_form(n_modes: int = len(MODES)) -> np.ndarray:
    """Block-diagonal symplectic form with 2x2 blocks [[0, 1], [-1, 0]]."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def physicality_margin(C: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian matrix C + (i/2) Omega.

    Non-negative (up to solver round-off) for every physical covariance
    matrix in the vacuum-1/2 normalization.
    """
    n_modes = C.shape[0] // 2
    herm = C + 0.5j * symplectic_form(n_modes)
    return float(np.linalg.eigvalsh(herm).min())
