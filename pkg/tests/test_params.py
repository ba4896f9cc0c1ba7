"""Model layer: feedback transforms, thermal occupations, drive amplitudes
and the nonlinear operating-point solver."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnomech import (DEFAULT_CONSTANTS, DriveSpec, FeedbackSpec, NonConvergence,
                       PhysicalConstants, drive_amplitudes, feedback_decay,
                       feedback_detuning, feedback_noise_factor,
                       low_excitation_ratios, solve_steady_state,
                       thermal_occupation)
from magnomech.params import MHZ, TWO_PI, mean_amplitude_rhs

from conftest import microscopic_cases

KAPPA = TWO_PI * 1e6


class TestFeedbackSpec:
    def test_transmissivity_complements_reflectivity(self):
        fb = FeedbackSpec(r_B=0.6, phi=1.0)
        assert fb.t_B == pytest.approx(0.8, rel=1e-15)

    @given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
    @settings(max_examples=50, deadline=None)
    def test_unitarity_to_machine_precision(self, r_B):
        fb = FeedbackSpec(r_B=r_B)
        assert abs(fb.r_B**2 + fb.t_B**2 - 1.0) < 1e-15

    def test_phase_normalized_into_principal_range(self):
        assert FeedbackSpec(phi=2 * math.pi + 0.3).phi == pytest.approx(0.3)
        assert FeedbackSpec(phi=-math.pi / 2).phi == pytest.approx(1.5 * math.pi)

    def test_reflectivity_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="r_B"):
            FeedbackSpec(r_B=1.5)


class TestFeedbackTransforms:
    def test_no_feedback_restores_bare_decay(self):
        for phi in (0.0, 1.0, math.pi, 5.0):
            assert feedback_decay(KAPPA, FeedbackSpec(0.0, phi)) == KAPPA

    def test_opposite_phase_enhances_decay(self):
        fb = FeedbackSpec(0.75, math.pi)
        assert feedback_decay(KAPPA, fb) == pytest.approx(2.5 * KAPPA, rel=1e-14)

    def test_critical_feedback_cancels_decay(self):
        assert feedback_decay(KAPPA, FeedbackSpec(0.5, 0.0)) == pytest.approx(0.0, abs=1e-9)

    def test_detuning_unchanged_at_opposite_phase(self):
        delta = -3.0 * KAPPA
        fb = FeedbackSpec(0.75, math.pi)
        assert feedback_detuning(delta, KAPPA, fb) == pytest.approx(delta, rel=1e-9)

    def test_detuning_shift_at_quadrature_phase(self):
        fb = FeedbackSpec(1.0, math.pi / 2)
        assert feedback_detuning(0.0, KAPPA, fb) == pytest.approx(-2.0 * KAPPA, rel=1e-15)

    def test_no_feedback_identity_for_any_phase(self):
        delta = 1.7 * KAPPA
        for phi in (0.0, 0.3, 2.0, math.pi):
            fb = FeedbackSpec(0.0, phi)
            assert feedback_decay(KAPPA, fb) == KAPPA
            assert feedback_detuning(delta, KAPPA, fb) == delta

    def test_noise_factor_closed_form(self):
        fb = FeedbackSpec(0.75, math.pi)
        # t_B^2 = 0.4375 and |1 + 0.75|^2 = 3.0625, both exact in binary
        assert feedback_noise_factor(fb) == pytest.approx(1.33984375, rel=1e-14)
        assert feedback_noise_factor(FeedbackSpec(0.0, 0.7)) == 1.0


class TestThermalOccupation:
    def test_mechanical_band_occupation(self):
        # oracle: direct Bose-Einstein evaluation at hbar*omega/k_B T = 0.0479924,
        # cross-checked against the high-temperature expansion k_B T/(hbar w) - 1/2
        w = thermal_occupation(TWO_PI * 10e6, 0.010)
        assert w == pytest.approx(20.340618339, rel=1e-9)
        high_t = DEFAULT_CONSTANTS.k_B * 0.010 / (DEFAULT_CONSTANTS.hbar * TWO_PI * 10e6) - 0.5
        assert w == pytest.approx(high_t, rel=3e-4)

    def test_microwave_band_occupation_is_negligible(self):
        w = thermal_occupation(TWO_PI * 10e9, 0.010)
        x = DEFAULT_CONSTANTS.hbar * TWO_PI * 10e9 / (DEFAULT_CONSTANTS.k_B * 0.010)
        assert w == pytest.approx(math.exp(-x), rel=1e-6)
        assert w < 1e-20

    def test_zero_temperature_limit(self):
        assert thermal_occupation(TWO_PI * 10e6, 0.0) == 0.0
        assert thermal_occupation(1.0, 0.0) == 0.0

    def test_extreme_ratio_underflows_to_zero(self):
        assert thermal_occupation(TWO_PI * 1e15, 1e-6) == 0.0

    @given(st.floats(min_value=1e-3, max_value=10.0))
    @settings(max_examples=50, deadline=None)
    def test_strictly_increasing_in_temperature(self, T):
        w = TWO_PI * 10e6
        assert thermal_occupation(w, T * 1.05) > thermal_occupation(w, T)

    @given(st.floats(min_value=1e6, max_value=1e11))
    @settings(max_examples=50, deadline=None)
    def test_strictly_decreasing_in_frequency(self, omega):
        assert thermal_occupation(omega * 1.05, 0.1) < thermal_occupation(omega, 0.1)

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            thermal_occupation(0.0, 1.0)


class TestDriveAmplitudes:
    DRIVE = DriveSpec(P=0.02, omega_l=TWO_PI * 1e10, B_0=2e-5,
                      sphere_diameter=250e-6, g_mb_bare=TWO_PI * 0.2,
                      Delta_m_bare=0.0)

    def test_zero_power_zero_cavity_drive(self):
        d = dataclasses.replace(self.DRIVE, P=0.0)
        eps_l, _ = drive_amplitudes(d, KAPPA)
        assert eps_l == 0.0

    def test_zero_field_zero_magnon_drive(self):
        d = dataclasses.replace(self.DRIVE, B_0=0.0)
        _, eps_m = drive_amplitudes(d, KAPPA)
        assert eps_m == 0.0

    def test_cavity_amplitude_frozen_value(self):
        # sqrt(2 P kappa_c / hbar omega_l) at P = 20 mW
        eps_l, _ = drive_amplitudes(self.DRIVE, KAPPA)
        assert eps_l == pytest.approx(1.947564794e14, rel=1e-9)

    def test_spin_count_via_independent_volume_formula(self):
        # volume oracle: V = (4/3) pi (d/2)^3 for a 250 um sphere
        radius = self.DRIVE.sphere_diameter / 2
        volume = 4.0 / 3.0 * math.pi * radius**3
        n_spins = DEFAULT_CONSTANTS.spin_density * volume
        assert n_spins == pytest.approx(3.452479427e16, rel=1e-9)
        _, eps_m = drive_amplitudes(self.DRIVE, KAPPA)
        expected = 1.25 * DEFAULT_CONSTANTS.gamma_gyro * math.sqrt(n_spins) * self.DRIVE.B_0
        assert eps_m == pytest.approx(expected, rel=1e-12)
        assert eps_m == pytest.approx(8.172284139e14, rel=1e-9)


class TestValidation:
    def test_constants_must_be_positive(self):
        with pytest.raises(ValueError):
            PhysicalConstants(spin_density=-1.0)

    def test_system_params_reject_negative_rates(self, baseline):
        with pytest.raises(ValueError, match="kappa_m"):
            dataclasses.replace(baseline, kappa_m=-1.0)
        with pytest.raises(ValueError, match="T"):
            dataclasses.replace(baseline, T=-0.1)
        with pytest.raises(ValueError, match="G_mb"):
            dataclasses.replace(baseline, G_mb=-1.0)

    def test_drive_spec_rejects_bad_values(self):
        with pytest.raises(ValueError):
            DriveSpec(P=-1.0, omega_l=1.0, B_0=0.0, sphere_diameter=1e-4,
                      g_mb_bare=0.0, Delta_m_bare=0.0)


class TestSteadyState:
    def test_decoupled_magnon_is_single_driven_mode(self, baseline):
        p = dataclasses.replace(baseline, J=0.0, G_ce=0.0, g_mc=0.0)
        d = DriveSpec(P=0.0, omega_l=TWO_PI * 1e10, B_0=1e-5,
                      sphere_diameter=250e-6, g_mb_bare=0.0,
                      Delta_m_bare=1.1 * baseline.omega_b)
        eps_l, eps_m = drive_amplitudes(d, p.kappa_c)
        ss = solve_steady_state(p, d, eps_l, eps_m)
        expected = eps_m / (p.kappa_m + 1j * d.Delta_m_bare)
        assert ss.ms == pytest.approx(expected, rel=1e-12)
        assert ss.qs == 0.0
        assert ss.converged

    def test_undriven_system_is_dark(self, baseline):
        d = DriveSpec(P=0.0, omega_l=TWO_PI * 1e10, B_0=0.0,
                      sphere_diameter=250e-6, g_mb_bare=TWO_PI * 0.2,
                      Delta_m_bare=baseline.omega_b)
        ss = solve_steady_state(baseline, d, 0.0, 0.0)
        assert abs(ss.c1s) == 0.0 and abs(ss.c2s) == 0.0
        assert abs(ss.es) == 0.0 and abs(ss.ms) == 0.0 and ss.qs == 0.0

    def test_coupling_magnitude_inversion(self):
        (p, d, eps_l, eps_m, ss) = microscopic_cases(seed=7, count=1)[0]
        assert abs(ss.ms) == pytest.approx(
            ss.G_mb_out / (math.sqrt(2.0) * d.g_mb_bare), rel=1e-12)

    def test_residual_bound(self):
        for (p, d, eps_l, eps_m, ss) in microscopic_cases(seed=11, count=3):
            # residual is normalized by max(|eps_l|, |eps_m|, 1) already
            assert ss.converged
            assert ss.residual < 1e-9

    def test_flow_vanishes_at_fixed_point(self):
        (p, d, eps_l, eps_m, ss) = microscopic_cases(seed=13, count=1)[0]
        rhs = mean_amplitude_rhs(p, d, eps_l, eps_m, ss.c1s, ss.c2s, ss.es,
                                 ss.ms, ss.qs, 0.0)
        scale = max(abs(eps_l), abs(eps_m), 1.0)
        assert max(abs(complex(v)) for v in rhs) < 1e-9 * scale

    def test_displacement_closes_fixed_point(self):
        (p, d, eps_l, eps_m, ss) = microscopic_cases(seed=17, count=1)[0]
        assert ss.qs == pytest.approx(
            -(d.g_mb_bare / p.omega_b) * abs(ss.ms) ** 2, rel=1e-9)
        assert ss.Delta_m_eff_out == pytest.approx(
            d.Delta_m_bare + d.g_mb_bare * ss.qs, rel=1e-12)

    def test_budget_exhaustion_raises(self, baseline):
        d = DriveSpec(P=0.02, omega_l=TWO_PI * 1e10, B_0=2e-5,
                      sphere_diameter=250e-6, g_mb_bare=TWO_PI * 0.2,
                      Delta_m_bare=baseline.omega_b)
        eps_l, eps_m = drive_amplitudes(d, baseline.kappa_c)
        with pytest.raises(NonConvergence):
            solve_steady_state(baseline, d, eps_l, eps_m, max_iter=2)

    def test_low_excitation_ratios_reported(self, baseline):
        (p, d, eps_l, eps_m, ss) = microscopic_cases(seed=19, count=1)[0]
        coupling_ratio, occupation_ratio = low_excitation_ratios(p, ss)
        assert coupling_ratio > 0
        assert occupation_ratio == pytest.approx(1.0 / abs(ss.c1s) ** 2)
