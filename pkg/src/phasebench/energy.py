"""Power, windowed energy and per-phase latency of decoded cycles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .capture import WaveformCapture
from .decode import InferenceCycle, Phase, PhaseWindow

# Fraction of a sample period within which a time counts as "on" a sample.
_SNAP = 1e-9


class RangeError(ValueError):
    """Integration window reaches outside the sampled span."""


@dataclass(frozen=True, eq=False)
class PowerSeries:
    sample_rate: float
    t0_offset: float
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.p)

    @property
    def times(self) -> np.ndarray:
        return self.t0_offset + np.arange(len(self.p)) / self.sample_rate

    @property
    def t_end(self) -> float:
        return self.t0_offset + (len(self.p) - 1) / self.sample_rate

    def _position(self, t: float) -> float:
        u = (t - self.t0_offset) * self.sample_rate
        r = round(u)
        return float(r) if abs(u - r) < _SNAP else u

    def _value_at(self, u: float) -> float:
        k = min(int(math.floor(u)), len(self.p) - 1)
        frac = u - k
        if frac == 0.0:
            return float(self.p[k])
        return float(self.p[k] + frac * (self.p[k + 1] - self.p[k]))

    def value_at(self, t: float) -> float:
        """Power at ``t`` by linear interpolation between samples."""
        u = self._position(t)
        if u < 0 or u > len(self.p) - 1:
            raise RangeError(f"t={t:.9g} s is outside the sampled span")
        return self._value_at(u)


def compute_power(capture: WaveformCapture) -> PowerSeries:
    """Core power per sample: ``(v_shunt / r_shunt) * v_core``."""
    v = capture.v_shunt
    bad = np.flatnonzero(~np.isfinite(v))
    if bad.size:
        raise ValueError(f"non-finite shunt voltage at sample {bad[0]}")
    meta = capture.meta
    current = v / meta.r_shunt
    p = current * meta.v_core
    p.setflags(write=False)
    return PowerSeries(meta.sample_rate, capture.t0_offset, p)


def integrate_interval(power: PowerSeries, t_start: float, t_end: float) -> float:
    """Trapezoidal energy of ``power`` over ``[t_start, t_end]`` in joules.

    The integrand at the two bounds is linearly interpolated, so bounds may
    fall between samples.
    """
    if not t_start < t_end:
        raise ValueError("t_start must be before t_end")
    n = len(power.p)
    ua, ub = power._position(t_start), power._position(t_end)
    if ua < 0 or ub > n - 1:
        raise RangeError(
            f"window [{t_start:.9g}, {t_end:.9g}] s outside sampled span "
            f"[{power.t0_offset:.9g}, {power.t_end:.9g}] s"
        )
    p = power.p
    dt = 1.0 / power.sample_rate
    pa, pb = power._value_at(ua), power._value_at(ub)
    i0 = int(math.ceil(ua))
    i1 = int(math.floor(ub))
    if i0 > i1:
        return (pa + pb) / 2 * (t_end - t_start)
    t_i0 = power.t0_offset + i0 / power.sample_rate
    t_i1 = power.t0_offset + i1 / power.sample_rate
    head = (pa + p[i0]) / 2 * (t_i0 - t_start) if i0 != ua else 0.0
    tail = (p[i1] + pb) / 2 * (t_end - t_i1) if i1 != ub else 0.0
    body = dt * (float(np.sum(p[i0:i1 + 1])) - (p[i0] + p[i1]) / 2) if i1 > i0 else 0.0
    return float(head + body + tail)


def integrate_energy(power: PowerSeries, window: PhaseWindow) -> float:
    return integrate_interval(power, window.t_start, window.t_end)


@dataclass(frozen=True)
class PhaseMetrics:
    """Energy and latency of one phase of one cycle; ``phase`` is None for the total."""

    phase: Phase | None
    energy: float
    latency: float
    energy_tol: float

    def __post_init__(self):
        if not self.latency > 0:
            raise ValueError("latency must be positive")
        if self.energy_tol < 0:
            raise ValueError("energy_tol must be >= 0")


@dataclass(frozen=True)
class CycleMetrics:
    pre: PhaseMetrics
    inf: PhaseMetrics
    post: PhaseMetrics
    total: PhaseMetrics
    index: int = 0

    def get(self, key: str) -> PhaseMetrics:
        return getattr(self, key)


def analyze_cycle(capture: WaveformCapture, cycle: InferenceCycle, power: PowerSeries | None = None) -> CycleMetrics:
    """Per-phase and total energy/latency of one decoded cycle.

    Pass ``power`` to reuse a series already computed for the capture. The
    total is the plain sum of the three active phases.
    """
    if power is None:
        power = compute_power(capture)
    tol = capture.meta.r_shunt_tol
    parts = []
    for w in cycle.windows:
        e = integrate_energy(power, w)
        parts.append(PhaseMetrics(w.phase, e, w.t_end - w.t_start, tol * abs(e)))
    energy = parts[0].energy + parts[1].energy + parts[2].energy
    latency = parts[0].latency + parts[1].latency + parts[2].latency
    total = PhaseMetrics(None, energy, latency, tol * abs(energy))
    return CycleMetrics(*parts, total=total, index=cycle.index)
