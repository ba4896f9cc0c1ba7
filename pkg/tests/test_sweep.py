"""Sweep engine: grids, stability masking, determinism and optimization."""

import dataclasses
import math

import numpy as np
import pytest

from magnomech import (DetuningMode, FeedbackSpec, NoStablePoint, SweepAxis,
                       apply_parameter, baseline_params, evaluate_point,
                       evaluate_single, optimize_entanglement, pair_from_label,
                       scan_feedback, sweep_1d, sweep_2d)
from magnomech.sweep import MARGINAL, STABLE, UNSTABLE

BE = pair_from_label("be")
ME = pair_from_label("me")
MB = pair_from_label("mb")


class TestApplyParameter:
    def test_symmetric_detuning(self, baseline):
        p = apply_parameter(baseline, "Delta_c", 3.0, DetuningMode.SYMMETRIC)
        assert p.Delta_1 == 3.0 and p.Delta_2 == 3.0

    def test_antisymmetric_detuning(self, baseline):
        p = apply_parameter(baseline, "Delta_c", 3.0, DetuningMode.ANTISYMMETRIC)
        assert p.Delta_1 == -3.0 and p.Delta_2 == 3.0

    def test_aggregate_axis_requires_mode(self, baseline):
        with pytest.raises(ValueError):
            apply_parameter(baseline, "Delta_c", 1.0, DetuningMode.INDEPENDENT)

    def test_feedback_fields(self, baseline):
        p = apply_parameter(baseline, "r_B", 0.3)
        assert p.feedback.r_B == 0.3 and p.feedback.phi == baseline.feedback.phi
        p = apply_parameter(baseline, "phi", 1.1)
        assert p.feedback.phi == 1.1 and p.feedback.r_B == baseline.feedback.r_B

    def test_scalar_field_and_unknown(self, baseline):
        assert apply_parameter(baseline, "T", 0.2).T == 0.2
        with pytest.raises(ValueError):
            apply_parameter(baseline, "nonsense", 1.0)


class TestSweepAxis:
    def test_validation(self):
        with pytest.raises(ValueError):
            SweepAxis("Delta_1", 0.0, 1.0, 1)
        with pytest.raises(ValueError):
            SweepAxis("Delta_1", 1.0, 1.0, 5)
        with pytest.raises(ValueError):
            SweepAxis("bogus", 0.0, 1.0, 5)

    def test_values_inclusive_linear(self):
        ax = SweepAxis("T", 0.0, 0.6, 4)
        np.testing.assert_allclose(ax.values(), [0.0, 0.2, 0.4, 0.6])


class TestSweeps:
    def test_near_constant_axis_gives_equal_values(self, baseline):
        ax = SweepAxis("T", 0.01, 0.01 * (1 + 1e-9), 2)
        result = sweep_1d(baseline, ax, pairs=(BE,))
        assert result.values.shape == (2, 1)
        assert result.values[0, 0] == pytest.approx(result.values[1, 0], rel=1e-6)

    def test_grid_layout_row_major(self, baseline):
        wb = baseline.omega_b
        ax1 = SweepAxis("Delta_1", -2 * wb, 2 * wb, 3)
        ax2 = SweepAxis("Delta_2", -1 * wb, 1 * wb, 2)
        result = sweep_2d(baseline, ax1, ax2, pairs=(BE, ME))
        assert result.values.shape == (6, 2)
        col1, col2 = result.axis_columns()
        np.testing.assert_allclose(col1[:2], [-2 * wb, -2 * wb])
        np.testing.assert_allclose(col2[:2], [-1 * wb, 1 * wb])
        assert result.grid_shape() == (3, 2)

    def test_distinct_axes_required(self, baseline):
        ax = SweepAxis("Delta_1", 0.0, 1.0, 3)
        with pytest.raises(ValueError):
            sweep_2d(baseline, ax, ax, pairs=(BE,))

    def test_stability_masking(self, baseline):
        # phi = 0 feedback sweep crosses into the unstable regime at high r_B
        p = dataclasses.replace(baseline, feedback=FeedbackSpec(0.0, 0.0))
        r_axis = SweepAxis("r_B", 0.0, 0.99, 12)
        phi_axis = SweepAxis("phi", 0.0, 0.1, 2)
        result = scan_feedback(p, r_axis, phi_axis, pairs=(BE,))
        statuses = set(result.stability)
        assert UNSTABLE in statuses and STABLE in statuses
        for i, status in enumerate(result.stability):
            if status == STABLE:
                assert math.isfinite(result.values[i, 0])
            else:
                assert math.isnan(result.values[i, 0])

    def test_no_entanglement_between_decoupled_cavities(self, no_feedback):
        wb = no_feedback.omega_b
        base = dataclasses.replace(no_feedback, J=0.0)
        ax1 = SweepAxis("Delta_1", -2 * wb, 2 * wb, 3)
        ax2 = SweepAxis("Delta_2", -2 * wb, 2 * wb, 3)
        result = sweep_2d(base, ax1, ax2, pairs=(BE, ME))
        stable_rows = np.array(result.stability) == STABLE
        # zero at the round-off floor of -ln(2 nu) with nu = 1/2 (1 - eps)
        assert (result.values[stable_rows] < 1e-12).all()

    def test_feedback_scan_rejects_unit_reflectivity(self, baseline):
        r_axis = SweepAxis("r_B", 0.0, 1.0 - 1e-12, 3)
        phi_axis = SweepAxis("phi", 0.0, 2 * math.pi, 3)
        scan_feedback(baseline, r_axis, phi_axis, pairs=(BE,))  # in range
        bad = SweepAxis("r_B", 0.5, 0.999999, 3)
        ok = SweepAxis("phi", 0.0, 1.0, 3)
        with pytest.raises(ValueError):
            scan_feedback(baseline, SweepAxis("phi", 0.0, 1.0, 3), ok, pairs=(BE,))

    def test_single_point_evaluation(self, baseline):
        result = evaluate_single(baseline, (BE, ME))
        assert result.axes == () and result.values.shape == (1, 2)
        assert result.stability[0] == STABLE


class TestDeterminism:
    def test_repeat_run_bitwise_identical(self, baseline):
        wb = baseline.omega_b
        ax = SweepAxis("Delta_c", -2 * wb, 2 * wb, 15)
        a = sweep_1d(baseline, ax, DetuningMode.SYMMETRIC, (BE, MB))
        b = sweep_1d(baseline, ax, DetuningMode.SYMMETRIC, (BE, MB))
        np.testing.assert_array_equal(a.values, b.values)
        assert a.stability == b.stability

    def test_worker_count_does_not_change_bits(self, baseline):
        wb = baseline.omega_b
        ax1 = SweepAxis("Delta_1", -3 * wb, 3 * wb, 5)
        ax2 = SweepAxis("Delta_2", -3 * wb, 3 * wb, 5)
        serial = sweep_2d(baseline, ax1, ax2, pairs=(BE, ME), workers=1)
        parallel = sweep_2d(baseline, ax1, ax2, pairs=(BE, ME), workers=3)
        np.testing.assert_array_equal(serial.values, parallel.values)
        np.testing.assert_array_equal(serial.max_real_eig, parallel.max_real_eig)
        assert serial.stability == parallel.stability


class TestOptimizer:
    def test_matches_dense_grid_on_unimodal_slice(self, baseline):
        """1D refinement against a dense-grid oracle at 10x the coarse
        resolution, on the magnon-mechanics peak of the symmetric scan."""
        wb = baseline.omega_b
        base = dataclasses.replace(baseline, J=0.4 * wb)
        lo, hi = 0.0, 2.0 * wb

        dense = np.linspace(lo, hi, 1001)
        dense_vals = []
        for value in dense:
            p = apply_parameter(base, "Delta_c", float(value), DetuningMode.SYMMETRIC)
            status, _, values = evaluate_point(p, (MB,))
            dense_vals.append(values[0] if status == STABLE else -np.inf)
        dense_argmax = dense[int(np.argmax(dense_vals))]

        best_params, best_value = optimize_entanglement(
            base, ["Delta_c"], [(lo, hi)], MB, mode=DetuningMode.SYMMETRIC)
        assert best_params.Delta_1 == best_params.Delta_2
        assert abs(best_params.Delta_1 - dense_argmax) <= (hi - lo) / 1000 * 2
        assert best_value >= max(dense_vals) - 1e-9

    def test_deterministic_and_worker_invariant(self, baseline):
        wb = baseline.omega_b
        args = (["Delta_1"], [(-2 * wb, 0.0)], BE)
        p1, v1 = optimize_entanglement(baseline, *args)
        p2, v2 = optimize_entanglement(baseline, *args, workers=2)
        assert v1 == v2 and p1 == p2

    def test_no_stable_point_raises(self, baseline):
        wb = baseline.omega_b
        base = dataclasses.replace(baseline, Delta_1=wb, Delta_2=wb)
        with pytest.raises(NoStablePoint):
            optimize_entanglement(base, ["Delta_m_eff"],
                                  [(-1.2 * wb, -0.7 * wb)], BE)

    def test_validates_inputs(self, baseline):
        with pytest.raises(ValueError):
            optimize_entanglement(baseline, [], [], BE)
        with pytest.raises(ValueError):
            optimize_entanglement(baseline, ["Delta_1"], [(1.0, 1.0)], BE)
        with pytest.raises(ValueError):
            optimize_entanglement(baseline, ["Delta_1"], [(0.0, 1.0), (0.0, 1.0)], BE)
