import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasebench.decode import (
    DigitalSignal,
    DigitizerConfig,
    GlitchError,
    Phase,
    PhaseWindow,
    SequenceError,
    decode_capture,
    decode_phases,
    digitize,
    extract_cycles,
)
from phasebench.synth import PhaseProfile, TraceSpec, synthesize, timeline

I, P, N, Q = Phase.IDLE, Phase.PRE, Phase.INFERENCE, Phase.POST


def test_phase_codes_and_gray_cycle():
    assert Phase.PRE.code == (1, 0)
    assert Phase.INFERENCE.code == (1, 1)
    assert Phase.POST.code == (0, 1)
    assert Phase.IDLE.code == (0, 0)
    assert len({p.code for p in Phase}) == 4
    ph = Phase.IDLE
    for _ in range(4):
        nxt = ph.successor()
        assert sum(a != b for a, b in zip(ph.code, nxt.code)) == 1
        ph = nxt
    assert ph is Phase.IDLE


def test_ideal_step_edge_at_midpoint():
    x = np.zeros(20)
    x[10:] = 3.3
    sig = digitize(x, 1e6, DigitizerConfig(threshold=1.65))
    assert sig.initial is False
    assert len(sig.edges) == 1
    t, level = sig.edges[0]
    assert level is True
    assert t == pytest.approx(9.5e-6, rel=1e-12)


def test_constant_channel_is_low_without_edges():
    sig = digitize(np.zeros(50), 1e6)
    assert sig.initial is False
    assert sig.edges == ()


def _noisy_ramp():
    # slow ramp through the threshold with worst-case alternating +-0.1 V noise
    base = np.concatenate([np.zeros(20), np.linspace(0, 3.3, 41), np.full(20, 3.3)])
    noise = 0.1 * np.where(np.arange(base.size) % 2 == 0, 1.0, -1.0)
    return base + noise


def _naive_crossings(x, thr):
    # brute-force oracle: count sign changes of x - thr sample by sample
    count = 0
    above = x[0] > thr
    for v in x[1:]:
        if (v > thr) != above:
            count += 1
            above = v > thr
    return count


def test_hysteresis_suppresses_noise_retriggering():
    x = _noisy_ramp()
    assert _naive_crossings(x, 1.65) > 1
    assert len(digitize(x, 1e6, DigitizerConfig(1.65, 0.0)).edges) == _naive_crossings(x, 1.65)
    sig = digitize(x, 1e6, DigitizerConfig(1.65, 0.4))
    assert len(sig.edges) == 1
    assert sig.edges[0][1] is True


def test_noisy_step_single_edge():
    rng = np.random.default_rng(1)
    x = np.where(np.arange(200) >= 100, 3.3, 0.0) + rng.uniform(-0.1, 0.1, 200)
    assert len(digitize(x, 1e6, DigitizerConfig(1.65, 0.4)).edges) == 1


def test_default_config_from_range():
    cfg = DigitizerConfig.for_channel([0.0, 3.3, 1.0])
    assert cfg.threshold == pytest.approx(1.65)
    assert cfg.hysteresis == pytest.approx(0.33)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=2, max_size=60))
def test_digitize_idempotent_on_digital_input(levels):
    fs = 1e3
    x = np.array(levels, dtype=float)
    first = digitize(x, fs, DigitizerConfig(0.5))
    resampled = np.array([first.level_at(i / fs) for i in range(len(x))], dtype=float)
    np.testing.assert_array_equal(resampled, x)
    second = digitize(resampled, fs, DigitizerConfig(0.5))
    assert second == first
    for t, _ in first.edges:
        assert (t * fs) % 1 == pytest.approx(0.5)


def _sig(codes):
    return DigitalSignal.from_levels(codes, sample_rate=1.0)


def test_decode_table_mapping():
    windows = decode_phases(_sig([0, 1, 1, 0, 0]), _sig([0, 0, 1, 1, 0]), sample_period=1.0)
    assert [(w.phase, w.t_start, w.t_end) for w in windows] == [
        (I, 0, 1), (P, 1, 2), (N, 2, 3), (Q, 3, 4), (I, 4, 5),
    ]
    assert windows[0].partial and windows[-1].partial
    assert not any(w.partial for w in windows[1:-1])


def test_decode_constant_idle():
    windows = decode_phases(_sig([0] * 6), _sig([0] * 6))
    assert len(windows) == 1
    assert windows[0].phase is I
    assert (windows[0].t_start, windows[0].t_end) == (0, 6)


def test_simultaneous_edges_are_glitch():
    with pytest.raises(GlitchError):
        decode_phases(_sig([0, 0, 1, 1]), _sig([0, 0, 1, 1]), sample_period=1.0)
    a = DigitalSignal(False, ((2.0, True),), 0.0, 5.0)
    b = DigitalSignal(False, ((2.4, True),), 0.0, 5.0)
    with pytest.raises(GlitchError):
        decode_phases(a, b, sample_period=1.0)
    # same spacing on one line is fine
    c = DigitalSignal(False, ((2.0, True), (2.4, False)), 0.0, 5.0)
    decode_phases(c, DigitalSignal(False, (), 0.0, 5.0), sample_period=1.0)


def _windows(phases, partial_ends=True):
    ws = [PhaseWindow(ph, float(i), float(i + 1)) for i, ph in enumerate(phases)]
    if partial_ends:
        ws[0] = PhaseWindow(ws[0].phase, 0.0, 1.0, partial=True)
        ws[-1] = PhaseWindow(ws[-1].phase, ws[-1].t_start, ws[-1].t_end, partial=True)
    return ws


def test_extract_two_cycles():
    res = extract_cycles(_windows([I, P, N, Q, I, P, N, Q], partial_ends=False))
    assert len(res.cycles) == 2
    assert [c.index for c in res.cycles] == [0, 1]
    assert res.cycles[1].pre.t_start == 5.0


def test_extract_discards_leading_partial_cycle():
    res = extract_cycles(_windows([N, Q, I, P, N, Q, I]))
    assert len(res.cycles) == 1
    assert res.cycles[0].pre.t_start == 3.0
    assert [w.phase for w in res.discarded] == [N, Q]


def test_extract_discards_trailing_partial_cycle():
    res = extract_cycles(_windows([I, P, N, Q, I, P, N]))
    assert len(res.cycles) == 1
    assert [w.phase for w in res.discarded] == [P, N]


def test_out_of_order_sequence_error():
    with pytest.raises(SequenceError) as info:
        extract_cycles(_windows([I, P, I, P, N, Q, I]))
    assert info.value.window_index == 2


def _spec(n_cycles, fs=1e6, ramp=False, seed=0):
    from phasebench.capture import CaptureMeta

    meta = CaptureMeta(fs, 0.9, 0.05)
    return TraceSpec(
        pre=PhaseProfile(113.7e-6, 0.13),
        inf=PhaseProfile(15.3e-6, 0.22),
        post=PhaseProfile(29.55e-6, 0.13),
        idle=PhaseProfile(20.1e-6, 0.02),
        n_cycles=n_cycles, sample_rate=fs, meta=meta, rng_seed=seed, edge_ramp=ramp,
    )


@pytest.mark.parametrize("ramp", [False, True])
def test_synth_three_cycles_boundaries(ramp):
    spec = _spec(3, ramp=ramp)
    windows = decode_capture(synthesize(spec))
    phases = [w.phase for w in windows]
    assert phases == [I] + [P, N, Q, I] * 3
    truth = timeline(spec).bounds
    got = [windows[0].t_start] + [w.t_end for w in windows]
    assert len(got) == len(truth)
    err = np.abs(np.array(got[1:-1]) - truth[1:-1])
    bound = 1e-12 if ramp else 0.5 / spec.sample_rate + 1e-12
    assert err.max() <= bound


def test_synth_1000_cycles_extracted():
    spec = _spec(1000)
    res = extract_cycles(decode_capture(synthesize(spec)))
    assert len(res.cycles) == 1000
    assert res.discarded == []
