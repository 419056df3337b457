"""Run statistics, energy-delay product and relative EDP comparisons."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .energy import CycleMetrics

PHASE_KEYS = ("pre", "inf", "post", "total")
PHASE_LABELS = {"pre": "Pre-Inference", "inf": "Inference", "post": "Post-Inference", "total": "Total"}


class ComparisonError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseStats:
    mean_energy: float
    std_energy: float
    mean_latency: float
    std_latency: float
    median_energy: float | None = None
    median_latency: float | None = None

    def __post_init__(self):
        if self.std_energy < 0 or self.std_latency < 0:
            raise ValueError("standard deviations must be >= 0")


@dataclass(frozen=True)
class RunStatistics:
    config_name: str
    n_cycles: int
    phases: dict[str, PhaseStats]
    n_discarded: int = 0

    def __post_init__(self):
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        if self.n_cycles == 1 and any(s.std_energy or s.std_latency for s in self.phases.values()):
            raise ValueError("std must be 0 for a single cycle")

    def __getitem__(self, key: str) -> PhaseStats:
        return self.phases[key]

    def to_dict(self) -> dict:
        return {
            "config_name": self.config_name,
            "n_cycles": self.n_cycles,
            "n_discarded": self.n_discarded,
            "phases": {k: asdict(v) for k, v in self.phases.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunStatistics":
        return cls(
            config_name=d["config_name"],
            n_cycles=int(d["n_cycles"]),
            phases={k: PhaseStats(**v) for k, v in d["phases"].items()},
            n_discarded=int(d.get("n_discarded", 0)),
        )

    @classmethod
    def from_means(cls, config_name: str, energies: Sequence[float], latencies: Sequence[float],
                   energy_std: Sequence[float] | None = None, latency_std: Sequence[float] | None = None,
                   n_cycles: int = 1000) -> "RunStatistics":
        """Build statistics from published per-phase values (pre, inf, post, total order)."""
        zeros = [0.0] * len(PHASE_KEYS)
        energy_std = energy_std or zeros
        latency_std = latency_std or zeros
        phases = {
            k: PhaseStats(float(e), float(se), float(t), float(st))
            for k, e, t, se, st in zip(PHASE_KEYS, energies, latencies, energy_std, latency_std, strict=True)
        }
        return cls(config_name, n_cycles, phases)


def _sample_std(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def aggregate(cycles: Sequence[CycleMetrics], config_name: str = "", n_discarded: int = 0) -> RunStatistics:
    """Mean and sample standard deviation (n-1 divisor) per phase and total."""
    if not cycles:
        raise ValueError("no cycles to aggregate")
    phases = {}
    for key in PHASE_KEYS:
        e = np.array([c.get(key).energy for c in cycles])
        t = np.array([c.get(key).latency for c in cycles])
        phases[key] = PhaseStats(
            mean_energy=float(np.mean(e)),
            std_energy=_sample_std(e),
            mean_latency=float(np.mean(t)),
            std_latency=_sample_std(t),
            median_energy=float(np.median(e)),
            median_latency=float(np.median(t)),
        )
    return RunStatistics(config_name, len(cycles), phases, n_discarded)


@dataclass(frozen=True)
class EdpReport:
    name: str
    edp: dict[str, float]

    def __post_init__(self):
        if any(v < 0 for v in self.edp.values()):
            raise ValueError("EDP must be >= 0")


def compute_edp(stats: RunStatistics) -> EdpReport:
    """EDP per phase as mean energy times mean latency (J*s)."""
    return EdpReport(
        stats.config_name,
        {k: s.mean_energy * s.mean_latency for k, s in stats.phases.items()},
    )


def per_cycle_edp(cycles: Sequence[CycleMetrics]) -> dict[str, np.ndarray]:
    """Distribution of per-cycle E*T products. Diagnostic only; not the reported EDP."""
    return {k: np.array([c.get(k).energy * c.get(k).latency for c in cycles]) for k in PHASE_KEYS}


def relative_edp(edp_ref: float, edp_cand: float) -> float:
    """Percentage EDP reduction of the candidate; positive means more efficient."""
    if edp_ref == 0:
        raise ComparisonError("reference EDP is zero")
    return 100.0 * (edp_ref - edp_cand) / edp_ref


@dataclass(frozen=True)
class ComparisonReport:
    reference: EdpReport
    candidate: EdpReport
    redp: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "reference": {"name": self.reference.name, "edp": dict(self.reference.edp)},
            "candidate": {"name": self.candidate.name, "edp": dict(self.candidate.edp)},
            "redp": dict(self.redp),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(
            EdpReport(d["reference"]["name"], dict(d["reference"]["edp"])),
            EdpReport(d["candidate"]["name"], dict(d["candidate"]["edp"])),
            dict(d["redp"]),
        )


def compare(reference: RunStatistics, candidate: RunStatistics) -> ComparisonReport:
    if set(reference.phases) != set(candidate.phases):
        raise ComparisonError(
            f"phase sets differ: {sorted(reference.phases)} vs {sorted(candidate.phases)}"
        )
    ref, cand = compute_edp(reference), compute_edp(candidate)
    redp = {}
    for key in ref.edp:
        if ref.edp[key] == 0:
            raise ComparisonError(f"reference EDP is zero in phase {key!r}")
        redp[key] = relative_edp(ref.edp[key], cand.edp[key])
    return ComparisonReport(ref, cand, redp)
