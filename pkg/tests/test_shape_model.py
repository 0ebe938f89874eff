"""Shape function: constant-load reduction, derivatives, smoothing, params."""

import numpy as np
import pytest

from dolgamma import DegradationParams, LoadGrid, LoadProfile, LoadSegment, ShapeEvaluator
from dolgamma.errors import DiscontinuityWarning, ValidationError
from dolgamma.load_profile import ramp_profile, ramp_then_constant
from dolgamma.shape_model import REFERENCE_PARAMS

STD_RATE = 388440.0

# independently computed with 30-digit arithmetic:
# (1000^a + b 1000^c)(u * 3000 - v) at the reference parameter point
ETA_CONST_3000_AT_1000H = 2.9718232701946157


def _const_profile(level, horizon=1.0e6):
    return LoadProfile([LoadSegment(0.0, horizon, "constant", float(level))])


class TestDegradationParams:
    def test_validation(self):
        with pytest.raises(ValidationError):
            DegradationParams(a=-0.1, b=0.01, c=0.4, u=0.001, v=0.3, xi=0.2)
        with pytest.raises(ValidationError):
            DegradationParams(a=0.1, b=0.01, c=0.4, u=0.001, v=np.nan, xi=0.2)
        with pytest.raises(ValidationError):
            DegradationParams(a=0.1, b=0.01, c=0.4, u=0.0, v=0.3, xi=0.2)

    def test_array_round_trip(self):
        p = REFERENCE_PARAMS
        q = DegradationParams.from_array(p.as_array())
        assert q == p
        with pytest.raises(ValidationError):
            DegradationParams.from_array(np.ones(5))

    def test_dict_round_trip(self):
        p = REFERENCE_PARAMS
        assert DegradationParams.from_dict(p.to_dict()) == p
        with pytest.raises(ValidationError):
            DegradationParams.from_dict({**p.to_dict(), "zeta": 1.0})
        with pytest.raises(ValidationError):
            DegradationParams.from_dict({"a": 0.1})

    def test_threshold(self):
        assert REFERENCE_PARAMS.threshold_stress == pytest.approx(0.359 / 0.00088)


class TestLoadGrid:
    def test_levels(self):
        g = LoadGrid(20.0)
        lv = g.levels_for(3000.0)
        assert lv[0] == 20.0
        assert lv[-1] == 3000.0
        assert lv.size == 150
        assert g.levels_for(3010.0)[-1] == 3000.0
        assert g.levels_for(15.0).size == 0

    def test_validation(self):
        with pytest.raises(ValidationError):
            LoadGrid(0.0)

    def test_absurd_level_count_rejected(self):
        # a unit mistake (hours where psi belong, say) would otherwise
        # ask for hundreds of millions of levels and exhaust memory
        prof = ramp_profile(388440.0, 20000.0)
        with pytest.raises(ValidationError):
            ShapeEvaluator(prof)


class TestConstantLoadReduction:
    def test_frozen_value(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        got = ev.eta(1000.0, REFERENCE_PARAMS)
        assert got == pytest.approx(ETA_CONST_3000_AT_1000H, rel=1e-12)

    def test_matches_closed_form_across_params(self):
        rng = np.random.default_rng(2024)
        for _ in range(60):
            tau = rng.uniform(500.0, 6000.0)
            ev = ShapeEvaluator(_const_profile(tau))
            p = DegradationParams(
                a=rng.uniform(0.005, 0.8),
                b=rng.uniform(1e-4, 0.1),
                c=rng.uniform(0.1, 0.9),
                u=rng.uniform(2e-4, 3e-3),
                v=rng.uniform(0.05, 1.5),
                xi=rng.uniform(0.05, 1.0),
            )
            t = rng.uniform(0.01, 9e5, size=8)
            got = ev.eta(t, p)
            want = ev.eta_constant_load(t, tau, p)
            np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-300)

    def test_below_threshold_is_zero(self):
        # threshold v/u = 407.95 psi at the reference point
        ev = ShapeEvaluator(_const_profile(400.0))
        assert ev.eta(1000.0, REFERENCE_PARAMS) == 0.0

    def test_zero_time(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        assert ev.eta(0.0, REFERENCE_PARAMS) == 0.0


class TestWeights:
    def test_telescoping_sum(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        w = ev.weights(REFERENCE_PARAMS)
        assert np.all(w >= 0)
        assert w.sum() == pytest.approx(0.00088 * 3000.0 - 0.359, rel=1e-12)

    def test_below_threshold_levels_weightless(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        w = ev.weights(REFERENCE_PARAMS)
        thresh = REFERENCE_PARAMS.threshold_stress
        assert np.all(w[ev.levels + 1e-9 < thresh] == 0.0)
        assert np.all(w[ev.levels - 20.0 > thresh] > 0.0)


class TestEtaGeneral:
    def test_monotone_on_mixed_profile(self):
        prof = LoadProfile(
            [
                LoadSegment(0.0, 100.0, "ramp", 0.0, slope=30.0),
                LoadSegment(100.0, 5000.0, "constant", 3000.0),
                LoadSegment(5000.0, 6000.0, "ramp", 3000.0, slope=-2.0),
                LoadSegment(6000.0, 9000.0, "constant", 1000.0),
            ]
        )
        ev = ShapeEvaluator(prof)
        t = np.linspace(0.0, 9000.0, 400)
        eta = ev.eta(t, REFERENCE_PARAMS)
        assert np.all(np.diff(eta) >= -1e-12)
        assert eta[-1] > 1.0

    def test_ramp_eta_continuous_at_knots(self):
        prof = ramp_then_constant(STD_RATE, 3000.0, 10.0)
        ev = ShapeEvaluator(prof)
        ks = ev._knots_by_segment[0]
        inner = ks[5:-5]
        eps = 1e-12
        lo = ev.eta(inner - eps, REFERENCE_PARAMS)
        hi = ev.eta(inner + eps, REFERENCE_PARAMS)
        at = ev.eta(inner, REFERENCE_PARAMS)
        np.testing.assert_allclose(lo, at, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(hi, at, rtol=1e-6, atol=1e-9)

    def test_chord_matches_raw_ladder_sum(self):
        # the interpolant coincides with the raw sum at knots; between
        # knots the raw sum runs above the chord (psi is concave) by at
        # most one level weight times psi over one knot interval
        prof = ramp_profile(STD_RATE, 0.1)
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        ks = ev._knots_by_segment[0]
        np.testing.assert_allclose(
            ev.eta(ks[30:60], p), ev.eta_raw(ks[30:60], p), rtol=1e-13
        )
        mids = 0.5 * (ks[30:60] + ks[31:61])
        gap = ev.eta_raw(mids, p) - ev.eta(mids, p)
        dt = ks[31] - ks[30]
        w_edge = p.u * ev.grid.spacing
        bound = (dt ** p.a + p.b * dt ** p.c) * w_edge
        assert np.all(gap >= -1e-12)
        assert np.all(gap <= bound)

    def test_scalar_in_float_out(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        out = ev.eta(100.0, REFERENCE_PARAMS)
        assert isinstance(out, float)


class TestEtaDot:
    def test_constant_load_analytic(self):
        tau = 3000.0
        ev = ShapeEvaluator(_const_profile(tau))
        p = REFERENCE_PARAMS
        t = np.array([0.5, 10.0, 1234.5, 8.0e5])
        got = ev.eta_dot(t, p)
        wsum = p.u * tau - p.v
        want = (p.a * t ** (p.a - 1) + p.b * p.c * t ** (p.c - 1)) * wsum
        np.testing.assert_allclose(got, want, rtol=1e-12)

    def test_finite_difference_general(self):
        prof = LoadProfile(
            [
                LoadSegment(0.0, 50.0, "constant", 2000.0),
                LoadSegment(50.0, 80.0, "constant", 3500.0),
                LoadSegment(80.0, 200.0, "constant", 2800.0),
            ]
        )
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        for t in (10.0, 60.0, 75.0, 150.0):
            h = 1e-6 * t
            fd = (ev.eta(t + h, p) - ev.eta(t - h, p)) / (2 * h)
            got = ev.eta_dot(t, p)
            assert got == pytest.approx(fd, rel=1e-5)

    def test_warns_at_crossing(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        with pytest.warns(DiscontinuityWarning):
            val = ev.eta_dot(0.0, REFERENCE_PARAMS)
        assert np.isinf(val)

    def test_warns_at_jump_activation(self):
        prof = LoadProfile(
            [
                LoadSegment(0.0, 50.0, "constant", 2000.0),
                LoadSegment(50.0, 80.0, "constant", 3500.0),
            ]
        )
        ev = ShapeEvaluator(prof)
        with pytest.warns(DiscontinuityWarning):
            ev.eta_dot(50.0, REFERENCE_PARAMS)


class TestSmoothEta:
    def test_matches_exact_in_constant_segments(self):
        prof = ramp_then_constant(STD_RATE, 3000.0, 1000.0)
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        t = np.array([10.0, 100.0, 999.0])
        eta_s, etad_s = ev.smooth_eta_and_dot(t, p)
        np.testing.assert_allclose(eta_s, ev.eta(t, p), rtol=1e-14)
        np.testing.assert_allclose(etad_s, ev.eta_dot(t, p), rtol=1e-12)

    def test_chord_slope_is_interval_average(self):
        # the smoothed derivative equals the knot-to-knot difference
        # quotient of the raw sum, i.e. the interval average of eta_dot
        prof = ramp_profile(STD_RATE, 0.1)
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        ks = ev._knots_by_segment[0]
        mids = 0.5 * (ks[40:50] + ks[41:51])
        _, chord = ev.smooth_eta_and_dot(mids, p)
        e_lo = ev.eta_raw(ks[40:50], p)
        e_hi = ev.eta_raw(ks[41:51], p)
        want = (e_hi - e_lo) / (ks[41:51] - ks[40:50])
        np.testing.assert_allclose(chord, want, rtol=1e-9)

    def test_interpolates_knot_values(self):
        prof = ramp_profile(STD_RATE, 0.1)
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        ks = ev._knots_by_segment[0]
        t0, t1 = ks[60], ks[61]
        e0 = ev.eta(t0, p)
        e1 = ev.eta(t1, p)
        tq = t0 + 0.25 * (t1 - t0)
        eq, _ = ev.smooth_eta_and_dot(tq, p)
        assert eq == pytest.approx(e0 + 0.25 * (e1 - e0), rel=1e-12)

    def test_scalar_form(self):
        prof = ramp_profile(STD_RATE, 0.1)
        ev = ShapeEvaluator(prof)
        eta, etad = ev.smooth_eta_and_dot(0.05, REFERENCE_PARAMS)
        assert isinstance(eta, float) and isinstance(etad, float)
        assert eta > 0 and etad > 0


class TestBoundShape:
    def test_mixed_times_consistent(self):
        prof = ramp_then_constant(STD_RATE, 4500.0, 8760.0)
        ev = ShapeEvaluator(prof)
        p = REFERENCE_PARAMS
        t_ramp = 0.5 * 4500.0 / STD_RATE
        times = np.array([t_ramp, 1.0, 100.0, 8000.0])
        bound = ev.bind(times)
        eta, etad = bound.eta_and_dot(p)
        np.testing.assert_allclose(eta, ev.eta(times, p), rtol=1e-14)
        # constant-segment part agrees with the exact derivative
        np.testing.assert_allclose(etad[1:], ev.eta_dot(times[1:], p), rtol=1e-12)
        assert etad[0] > 0

    def test_rejects_negative_times(self):
        ev = ShapeEvaluator(_const_profile(3000.0))
        with pytest.raises(ValidationError):
            ev.bind([-1.0])
