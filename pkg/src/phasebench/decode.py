"""Trigger digitizing and phase decoding.

Two GPIO trigger lines encode the execution phase of the device under test:

    =============== ======= =======
    phase           trig1   trig2
    =============== ======= =======
    PreInference    1       0
    Inference       1       1
    PostInference   0       1
    Idle            0       0
    =============== ======= =======

Walked in the order Idle -> Pre -> Inference -> Post -> Idle the codes form a
Gray cycle, so exactly one line toggles at every phase boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Phase(enum.Enum):
    PRE = (1, 0)
    INFERENCE = (1, 1)
    POST = (0, 1)
    IDLE = (0, 0)

    @property
    def code(self) -> tuple[int, int]:
        return self.value

    @property
    def key(self) -> str:
        return _KEYS[self]

    @classmethod
    def from_code(cls, t1: int, t2: int) -> "Phase":
        return cls((int(t1), int(t2)))

    def successor(self) -> "Phase":
        """Next phase along the Gray cycle."""
        return _SUCCESSOR[self]


_KEYS = {Phase.PRE: "pre", Phase.INFERENCE: "inf", Phase.POST: "post", Phase.IDLE: "idle"}
_SUCCESSOR = {
    Phase.IDLE: Phase.PRE,
    Phase.PRE: Phase.INFERENCE,
    Phase.INFERENCE: Phase.POST,
    Phase.POST: Phase.IDLE,
}
ACTIVE_PHASES = (Phase.PRE, Phase.INFERENCE, Phase.POST)


class DecodeError(ValueError):
    pass


class GlitchError(DecodeError):
    """Both trigger lines changed at (nearly) the same instant."""

    def __init__(self, message: str, time: float, window_index: int | None = None):
        self.time = time
        self.window_index = window_index
        super().__init__(f"{message} at t={time:.9g} s")


class SequenceError(DecodeError):
    """Phases appeared out of Idle -> Pre -> Inference -> Post order."""

    def __init__(self, message: str, window_index: int, t_start: float, t_end: float):
        self.window_index = window_index
        self.t_start = t_start
        self.t_end = t_end
        super().__init__(f"{message} (window {window_index}, [{t_start:.9g}, {t_end:.9g}] s)")


@dataclass(frozen=True)
class DigitizerConfig:
    threshold: float
    hysteresis: float = 0.0

    def __post_init__(self):
        if self.hysteresis < 0:
            raise ValueError("hysteresis must be >= 0")

    @classmethod
    def for_channel(cls, channel) -> "DigitizerConfig":
        """Threshold at mid-range, hysteresis at 10% of the observed range."""
        x = np.asarray(channel, dtype=float)
        lo, hi = float(x.min()), float(x.max())
        return cls(threshold=(lo + hi) / 2, hysteresis=0.1 * (hi - lo))


@dataclass(frozen=True)
class DigitalSignal:
    """A two-level signal: initial level plus ordered ``(time, new_level)`` edges."""

    initial: bool
    edges: tuple[tuple[float, bool], ...]
    t_start: float
    t_end: float

    def level_at(self, t: float) -> bool:
        level = self.initial
        for when, new in self.edges:
            if when > t:
                break
            level = new
        return level

    @property
    def edge_times(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=float)

    @classmethod
    def from_levels(cls, levels, sample_rate: float, t0: float = 0.0) -> "DigitalSignal":
        """Signal from per-sample levels; edges land on sample boundaries.

        Each sample is taken to hold its level for one full period, so the
        span is ``[t0, t0 + n / sample_rate]``.
        """
        lv = np.asarray(levels).astype(bool)
        change = np.flatnonzero(lv[1:] != lv[:-1]) + 1
        edges = tuple((t0 + i / sample_rate, bool(lv[i])) for i in change)
        return cls(bool(lv[0]), edges, t0, t0 + len(lv) / sample_rate)


def digitize(channel, sample_rate: float, cfg: DigitizerConfig | None = None, t0: float = 0.0) -> DigitalSignal:
    """Schmitt-trigger a sampled channel into a :class:`DigitalSignal`.

    The level goes high once a sample exceeds ``threshold + hysteresis/2``
    and low once one drops below ``threshold - hysteresis/2``. Each accepted
    transition is timed at the last threshold crossing before it, linearly
    interpolated between the two straddling samples.

    A channel that never leaves the hysteresis band is returned as a
    constant low signal.
    """
    x = np.asarray(channel, dtype=float)
    if x.size == 0:
        raise ValueError("channel is empty")
    if cfg is None:
        cfg = DigitizerConfig.for_channel(x)
    thr, half = cfg.threshold, cfg.hysteresis / 2
    dt = 1.0 / sample_rate
    t_end = t0 + (x.size - 1) * dt

    high = x > thr + half
    low = x < thr - half
    defined = high | low
    if not defined.any():
        return DigitalSignal(False, (), t0, t_end)

    # forward-fill the last defined level
    idx = np.where(defined, np.arange(x.size), -1)
    np.maximum.accumulate(idx, out=idx)
    first = int(np.argmax(defined))
    state = high[np.maximum(idx, first)]

    flips = np.flatnonzero(state[1:] != state[:-1]) + 1
    above = x > thr
    rising_k = np.flatnonzero(~above[:-1] & above[1:])
    falling_k = np.flatnonzero(above[:-1] & ~above[1:])

    edges = []
    for j in flips:
        new = bool(state[j])
        crossings = rising_k if new else falling_k
        # last crossing between samples k and k+1 with k+1 <= j
        k = int(crossings[np.searchsorted(crossings, j, side="left") - 1])
        frac = (thr - x[k]) / (x[k + 1] - x[k])
        edges.append((t0 + (k + frac) * dt, new))
    return DigitalSignal(bool(state[0]), tuple(edges), t0, t_end)


@dataclass(frozen=True)
class PhaseWindow:
    phase: Phase
    t_start: float
    t_end: float
    partial: bool = False

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class InferenceCycle:
    pre: PhaseWindow
    inf: PhaseWindow
    post: PhaseWindow
    index: int

    def __post_init__(self):
        phases = (self.pre.phase, self.inf.phase, self.post.phase)
        if phases != ACTIVE_PHASES:
            raise ValueError(f"cycle phases out of order: {phases}")
        if self.pre.t_end != self.inf.t_start or self.inf.t_end != self.post.t_start:
            raise ValueError("cycle windows do not abut")

    @property
    def windows(self) -> tuple[PhaseWindow, PhaseWindow, PhaseWindow]:
        return (self.pre, self.inf, self.post)


def decode_phases(trig1: DigitalSignal, trig2: DigitalSignal, sample_period: float = 0.0) -> list[PhaseWindow]:
    """Split the capture span into phase windows from the two trigger signals.

    Args:
        sample_period: edges on different lines closer than this are a glitch.

    Raises:
        GlitchError: both lines toggled together.
    """
    t_start = min(trig1.t_start, trig2.t_start)
    t_end = max(trig1.t_end, trig2.t_end)
    merged = sorted(
        [(t, 0, lvl) for t, lvl in trig1.edges] + [(t, 1, lvl) for t, lvl in trig2.edges],
        key=lambda e: e[0],
    )
    bits = [int(trig1.initial), int(trig2.initial)]
    windows: list[PhaseWindow] = []
    cur_start = t_start
    prev = None
    for t, ch, lvl in merged:
        if prev is not None and prev[1] != ch and (t - prev[0] < sample_period or t == prev[0]):
            raise GlitchError("simultaneous transitions on both trigger lines", t, len(windows))
        if bits[ch] == int(lvl):
            prev = (t, ch)
            continue
        if t > cur_start:
            windows.append(PhaseWindow(Phase.from_code(*bits), cur_start, t))
            cur_start = t
        bits[ch] = int(lvl)
        prev = (t, ch)
    if t_end > cur_start or not windows:
        windows.append(PhaseWindow(Phase.from_code(*bits), cur_start, t_end))

    windows[0] = _as_partial(windows[0])
    windows[-1] = _as_partial(windows[-1])
    return windows


def _as_partial(w: PhaseWindow) -> PhaseWindow:
    return PhaseWindow(w.phase, w.t_start, w.t_end, partial=True)


@dataclass
class CycleExtraction:
    cycles: list[InferenceCycle]
    discarded: list[PhaseWindow] = field(default_factory=list)


def extract_cycles(windows: list[PhaseWindow]) -> CycleExtraction:
    """Group Pre -> Inference -> Post runs into :class:`InferenceCycle` objects.

    Partial windows, and active windows belonging to a cycle that a partial
    window cut short, end up in ``discarded``. Idle windows are skipped.

    Raises:
        SequenceError: two complete windows follow each other out of order.
    """
    for i in range(1, len(windows)):
        a, b = windows[i - 1], windows[i]
        if a.partial or b.partial:
            continue
        if b.phase is not a.phase.successor():
            raise SequenceError(
                f"{a.phase.name} followed by {b.phase.name}", i, b.t_start, b.t_end
            )

    cycles: list[InferenceCycle] = []
    discarded: list[PhaseWindow] = []
    run: list[PhaseWindow] = []
    for w in windows:
        if w.partial:
            if w.phase is not Phase.IDLE:
                discarded.append(w)
            discarded.extend(run)
            run = []
            continue
        if w.phase is Phase.IDLE:
            discarded.extend(run)
            run = []
            continue
        if w.phase is Phase.PRE:
            discarded.extend(run)
            run = [w]
        else:
            run.append(w)
        if len(run) == 3 and run[0].phase is Phase.PRE:
            cycles.append(InferenceCycle(run[0], run[1], run[2], index=len(cycles)))
            run = []
    discarded.extend(run)
    discarded.sort(key=lambda w: w.t_start)
    return CycleExtraction(cycles, discarded)


def decode_capture(capture, cfg1: DigitizerConfig | None = None, cfg2: DigitizerConfig | None = None) -> list[PhaseWindow]:
    """Digitize both trigger channels of ``capture`` and decode phase windows."""
    fs = capture.meta.sample_rate
    if capture.meta.trig_encoding == "digital":
        default = DigitizerConfig(threshold=0.5, hysteresis=0.0)
        cfg1 = cfg1 or default
        cfg2 = cfg2 or default
    s1 = digitize(capture.trig1, fs, cfg1, capture.t0_offset)
    s2 = digitize(capture.trig2, fs, cfg2, capture.t0_offset)
    return decode_phases(s1, s2, sample_period=1.0 / fs)
