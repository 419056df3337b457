"""Ground-truth trace synthesis.

Builds captures from piecewise-affine per-phase power profiles wrapped in the
two-line trigger coding, and the closed-form energy/latency they should
analyze to. Used as the test oracle and as a stand-in for a real device.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .capture import CaptureMeta, WaveformCapture
from .decode import Phase

MIN_SAMPLES_PER_PHASE = 10


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseProfile:
    """Power over one phase: ``mean_power + power_slope * (t - phase_start)`` plus noise.

    ``mean_power`` is the power at the start of the phase.
    """

    duration: float
    mean_power: float
    power_slope: float = 0.0
    noise_std: float = 0.0

    def validate(self, name: str = "phase") -> None:
        if not self.duration > 0:
            raise SpecError(f"{name}: duration must be positive")
        if self.mean_power < 0:
            raise SpecError(f"{name}: mean_power must be >= 0")
        if self.noise_std < 0:
            raise SpecError(f"{name}: noise_std must be >= 0")
        if self.mean_power + self.power_slope * self.duration < 0:
            raise SpecError(f"{name}: power ramp goes negative within the phase")

    @property
    def energy(self) -> float:
        return self.mean_power * self.duration + self.power_slope * self.duration ** 2 / 2


@dataclass(frozen=True)
class TraceSpec:
    pre: PhaseProfile
    inf: PhaseProfile
    post: PhaseProfile
    idle: PhaseProfile
    n_cycles: int
    sample_rate: float
    meta: CaptureMeta
    rng_seed: int
    trigger_high: float = 3.3
    edge_ramp: bool = False

    def profile(self, phase: Phase) -> PhaseProfile:
        return getattr(self, phase.key)

    def validate(self) -> None:
        if self.n_cycles < 1:
            raise SpecError("n_cycles must be >= 1")
        if not self.sample_rate > 0:
            raise SpecError("sample_rate must be positive")
        if self.meta.sample_rate != self.sample_rate:
            raise SpecError("meta.sample_rate differs from sample_rate")
        for name in ("pre", "inf", "post", "idle"):
            prof = getattr(self, name)
            prof.validate(name)
            if prof.duration * self.sample_rate < MIN_SAMPLES_PER_PHASE:
                raise SpecError(f"{name}: phase spans fewer than {MIN_SAMPLES_PER_PHASE} samples")

    def to_dict(self) -> dict:
        meta = asdict(self.meta)
        meta.pop("sample_rate")
        return {
            "pre": asdict(self.pre),
            "inf": asdict(self.inf),
            "post": asdict(self.post),
            "idle": asdict(self.idle),
            "n_cycles": self.n_cycles,
            "sample_rate": self.sample_rate,
            "meta": meta,
            "rng_seed": self.rng_seed,
            "trigger_high": self.trigger_high,
            "edge_ramp": self.edge_ramp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceSpec":
        try:
            if "rng_seed" not in d:
                raise SpecError("rng_seed is required")
            sample_rate = float(d["sample_rate"])
            meta = dict(d.get("meta", {}))
            if "sample_rate" in meta and float(meta["sample_rate"]) != sample_rate:
                raise SpecError("meta.sample_rate differs from sample_rate")
            meta["sample_rate"] = sample_rate
            spec = cls(
                **{k: PhaseProfile(**d[k]) for k in ("pre", "inf", "post", "idle")},
                n_cycles=int(d["n_cycles"]),
                sample_rate=sample_rate,
                meta=CaptureMeta(**meta),
                rng_seed=int(d["rng_seed"]),
                trigger_high=float(d.get("trigger_high", 3.3)),
                edge_ramp=bool(d.get("edge_ramp", False)),
            )
        except SpecError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"invalid trace spec: {exc}") from None
        spec.validate()
        return spec


def load_trace_spec(path) -> TraceSpec:
    with open(path, encoding="utf-8") as f:
        try:
            return TraceSpec.from_dict(json.load(f))
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from None


@dataclass(frozen=True)
class Timeline:
    """Phase segments of a synthesized trace: segment ``j`` spans ``bounds[j]..bounds[j+1]``."""

    phases: tuple[Phase, ...]
    bounds: np.ndarray

    def toggle_times(self) -> np.ndarray:
        return self.bounds[1:-1]

    def cycle_windows(self) -> list[tuple[float, float, float, float]]:
        """``(pre_start, inf_start, post_start, post_end)`` per cycle."""
        out = []
        for j, ph in enumerate(self.phases):
            if ph is Phase.PRE:
                out.append(tuple(float(x) for x in self.bounds[j:j + 4]))
        return out


def timeline(spec: TraceSpec) -> Timeline:
    """Idle, then each cycle as Pre, Inference, Post, Idle."""
    order = [Phase.IDLE] + [Phase.PRE, Phase.INFERENCE, Phase.POST, Phase.IDLE] * spec.n_cycles
    durations = [spec.profile(p).duration for p in order]
    bounds = np.concatenate([[0.0], np.cumsum(durations)])
    return Timeline(tuple(order), bounds)


def synthesize(spec: TraceSpec) -> WaveformCapture:
    """Render ``spec`` into a capture; deterministic for a given ``rng_seed``."""
    spec.validate()
    tl = timeline(spec)
    fs = spec.sample_rate
    n = int(math.floor(tl.bounds[-1] * fs)) + 1
    t = np.arange(n) / fs
    seg = np.searchsorted(tl.bounds, t, side="right") - 1
    seg = np.clip(seg, 0, len(tl.phases) - 1)

    phase_idx = {p: i for i, p in enumerate(Phase)}
    profiles = [spec.profile(p) for p in Phase]
    p0 = np.array([pr.mean_power for pr in profiles])
    slope = np.array([pr.power_slope for pr in profiles])
    sigma = np.array([pr.noise_std for pr in profiles])
    codes = np.array([p.code for p in Phase], dtype=float)

    kind = np.array([phase_idx[p] for p in tl.phases])[seg]
    rng = np.random.default_rng(spec.rng_seed)
    power = p0[kind] + slope[kind] * (t - tl.bounds[seg])
    if sigma.any():
        power = power + sigma[kind] * rng.standard_normal(n)

    meta = spec.meta
    v_shunt = power / meta.v_core * meta.r_shunt
    high = 1.0 if meta.trig_encoding == "digital" else spec.trigger_high
    trig = codes[kind] * high
    if spec.edge_ramp:
        _apply_ramps(trig, tl, fs, high)
    return WaveformCapture(meta, v_shunt, trig[:, 0], trig[:, 1])


def _apply_ramps(trig: np.ndarray, tl: Timeline, fs: float, high: float) -> None:
    """Replace step edges by linear edges spanning two sample periods.

    The two samples straddling each toggle then lie on the ramp, so linear
    interpolation recovers the toggle instant exactly.
    """
    n = trig.shape[0]
    for j in range(1, len(tl.phases)):
        tau = tl.bounds[j]
        old, new = tl.phases[j - 1].code, tl.phases[j].code
        ch = 0 if old[0] != new[0] else 1
        k = int(math.floor(tau * fs))
        for i in (k, k + 1):
            if 0 <= i < n:
                frac = min(max((i / fs - tau) * fs / 2 + 0.5, 0.0), 1.0)
                trig[i, ch] = high * (old[ch] + (new[ch] - old[ch]) * frac)


@dataclass(frozen=True)
class ExpectedMetrics:
    energy: dict[str, float] = field(default_factory=dict)
    latency: dict[str, float] = field(default_factory=dict)


def expected_metrics(spec: TraceSpec) -> ExpectedMetrics:
    """Closed-form per-cycle energy ``P0*T + s*T**2/2`` and latency ``T`` per phase."""
    energy, latency = {}, {}
    for key in ("pre", "inf", "post", "idle"):
        prof = getattr(spec, key)
        energy[key] = prof.energy
        latency[key] = prof.duration
    energy["total"] = energy["pre"] + energy["inf"] + energy["post"]
    latency["total"] = latency["pre"] + latency["inf"] + latency["post"]
    return ExpectedMetrics(energy, latency)


def noise_for_energy_std(energy_std: float, duration: float, sample_rate: float) -> float:
    """Per-sample power noise giving ``energy_std`` on a phase's integrated energy.

    White noise of std ``s`` integrated over ``N = duration * sample_rate``
    samples has std of about ``s * sqrt(N) / sample_rate``.
    """
    return energy_std * sample_rate / math.sqrt(duration * sample_rate)


def constant_power_spec(energies, latencies, *, n_cycles: int, sample_rate: float, meta: CaptureMeta,
                        idle: PhaseProfile | None = None, rng_seed: int = 0, **kwargs) -> TraceSpec:
    """Spec with constant per-phase power ``E / T`` for given (pre, inf, post) energies and durations."""
    profiles = [PhaseProfile(duration=t, mean_power=e / t) for e, t in zip(energies, latencies, strict=True)]
    if idle is None:
        idle = PhaseProfile(duration=min(latencies), mean_power=0.0)
    meta = replace(meta, sample_rate=sample_rate)
    spec = TraceSpec(*profiles, idle=idle, n_cycles=n_cycles, sample_rate=sample_rate,
                     meta=meta, rng_seed=rng_seed, **kwargs)
    spec.validate()
    return spec
