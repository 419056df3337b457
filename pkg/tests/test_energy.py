import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasebench.capture import CaptureMeta, WaveformCapture
from phasebench.decode import InferenceCycle, Phase, PhaseWindow, decode_capture, extract_cycles
from phasebench.energy import (
    PowerSeries,
    RangeError,
    analyze_cycle,
    compute_power,
    integrate_energy,
    integrate_interval,
)
from phasebench.synth import PhaseProfile, TraceSpec, synthesize

from reference_data import ENERGY_UJ, LATENCY_US


def _series(p, fs=1e6, t0=0.0):
    return PowerSeries(fs, t0, np.asarray(p, dtype=float))


def test_power_from_shunt_drop():
    meta = CaptureMeta(1e6, 0.9, 0.05)
    cap = WaveformCapture(meta, [5e-3, 5e-3], [0, 0], [0, 0])
    p = compute_power(cap).p
    assert p[0] == pytest.approx(0.090, rel=1e-12)
    assert (5e-3 / 0.05) == pytest.approx(0.1)


def test_zero_shunt_voltage_gives_zero_power(meta):
    cap = WaveformCapture(meta, np.zeros(10), np.zeros(10), np.zeros(10))
    assert not compute_power(cap).p.any()


def test_halving_shunt_doubles_power():
    v = np.linspace(1e-3, 9e-3, 17)
    a = compute_power(WaveformCapture(CaptureMeta(1e6, 0.9, 0.05), v, v * 0, v * 0)).p
    b = compute_power(WaveformCapture(CaptureMeta(1e6, 0.9, 0.025), v, v * 0, v * 0)).p
    np.testing.assert_allclose(b, 2 * a, rtol=1e-15)


def test_non_finite_sample_named(meta):
    cap = WaveformCapture(meta, [1e-3, np.nan, 1e-3], [0, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError, match="sample 1"):
        compute_power(cap)


def test_constant_power_window():
    ps = _series(np.full(5001, 0.1))
    assert integrate_interval(ps, 0.0, 2e-3) == pytest.approx(200e-6, rel=1e-12)


def test_linear_ramp_window():
    t = np.arange(2001) / 1e6
    ps = _series(0.1 * t / 2e-3)
    assert integrate_interval(ps, 0.0, 2e-3) == pytest.approx(100e-6, rel=1e-12)


def test_window_between_two_samples():
    ps = _series([0.0, 1.0, 2.0], fs=1.0)
    # affine integrand: exact
    assert integrate_interval(ps, 0.25, 0.75) == pytest.approx(0.25, rel=1e-15)


def test_piecewise_constant_mid_sample_boundary():
    # 120 mW for 1 ms then 200 mW, sampled at 1 MHz, windows split at a
    # boundary halfway between samples
    fs = 1e6
    t = np.arange(3001) / fs
    tau = 1000.5e-6
    p = np.where(t < tau, 0.120, 0.200)
    ps = _series(p, fs)
    low = integrate_interval(ps, 0.0, tau)
    high = integrate_interval(ps, tau, 2500.5e-6)
    assert low == pytest.approx(0.120 * tau, rel=1e-3)
    assert high == pytest.approx(0.200 * 1.5e-3, rel=1e-3)


def test_window_outside_span():
    ps = _series(np.ones(11))
    with pytest.raises(RangeError):
        integrate_interval(ps, -1e-6, 5e-6)
    with pytest.raises(RangeError):
        integrate_interval(ps, 5e-6, 10.5e-6)
    assert integrate_interval(ps, 0.0, 10e-6) == pytest.approx(10e-6)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=200),
    st.lists(st.floats(0.0, 1.0), min_size=1, max_size=6),
)
def test_additivity_over_partitions(values, cuts):
    ps = _series(values, fs=1.0)
    end = len(values) - 1
    points = sorted({0.0, float(end), *(c * end for c in cuts)})
    whole = integrate_interval(ps, 0.0, float(end))
    parts = sum(integrate_interval(ps, a, b) for a, b in zip(points, points[1:]) if b > a)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-12)


def _cycle_capture(v_core=0.9, r_shunt=0.05):
    meta = CaptureMeta(1e6, v_core, r_shunt)
    spec = TraceSpec(
        pre=PhaseProfile(300.3e-6, 0.13, power_slope=50.0),
        inf=PhaseProfile(60.7e-6, 0.22),
        post=PhaseProfile(90.2e-6, 0.13, power_slope=-100.0),
        idle=PhaseProfile(40e-6, 0.02),
        n_cycles=2, sample_rate=1e6, meta=meta, rng_seed=1,
    )
    cap = synthesize(spec)
    cycles = extract_cycles(decode_capture(cap)).cycles
    return cap, cycles


def test_analyze_cycle_total_is_sum():
    cap, cycles = _cycle_capture()
    m = analyze_cycle(cap, cycles[0])
    assert m.total.energy == m.pre.energy + m.inf.energy + m.post.energy
    assert m.total.latency == m.pre.latency + m.inf.latency + m.post.latency
    assert m.pre.phase is Phase.PRE and m.total.phase is None
    for pm in (m.pre, m.inf, m.post, m.total):
        assert pm.energy_tol == pytest.approx(0.01 * pm.energy, rel=1e-15)


def test_linearity_in_supply_and_shunt():
    cap, cycles = _cycle_capture()
    base = analyze_cycle(cap, cycles[0])
    scaled_v = WaveformCapture(CaptureMeta(1e6, 1.8, 0.05), cap.v_shunt, cap.trig1, cap.trig2)
    scaled_r = WaveformCapture(CaptureMeta(1e6, 0.9, 0.1), cap.v_shunt, cap.trig1, cap.trig2)
    mv = analyze_cycle(scaled_v, cycles[0])
    mr = analyze_cycle(scaled_r, cycles[0])
    for key in ("pre", "inf", "post", "total"):
        assert mv.get(key).energy == pytest.approx(2 * base.get(key).energy, rel=1e-12)
        assert mr.get(key).energy == pytest.approx(base.get(key).energy / 2, rel=1e-12)
        assert mv.get(key).latency == base.get(key).latency


def test_zero_power_cycle(meta):
    n = 100
    cap = WaveformCapture(meta, np.zeros(n), np.zeros(n), np.zeros(n))
    w = [PhaseWindow(Phase.PRE, 10e-6, 40e-6), PhaseWindow(Phase.INFERENCE, 40e-6, 50e-6),
         PhaseWindow(Phase.POST, 50e-6, 70.5e-6)]
    m = analyze_cycle(cap, InferenceCycle(*w, index=0))
    assert m.total.energy == 0.0
    assert m.pre.latency == pytest.approx(30e-6)
    assert m.post.latency == pytest.approx(20.5e-6)


def test_published_dscnn_totals_are_phase_sums():
    e = ENERGY_UJ[("DSCNN", "H-Perf")]
    t = LATENCY_US[("DSCNN", "H-Perf")]
    assert sum(e[:3]) == pytest.approx(e[3], abs=0.1 + 1e-9)
    assert sum(t[:3]) == pytest.approx(1586.5)
    assert sum(t[:3]) == pytest.approx(t[3], abs=0.1)


def test_integrate_energy_uses_window_bounds():
    ps = _series(np.full(101, 2.0))
    w = PhaseWindow(Phase.PRE, 10.25e-6, 20.75e-6)
    assert integrate_energy(ps, w) == pytest.approx(2.0 * 10.5e-6, rel=1e-12)
