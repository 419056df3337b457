"""Phase-segmented energy, latency and EDP benchmarking from dual-trigger captures."""

__version__ = "0.1.0"

from .capture import CaptureFormatError, CaptureMeta, WaveformCapture, parse_capture, write_capture
from .decode import (
    DigitizerConfig,
    GlitchError,
    InferenceCycle,
    Phase,
    PhaseWindow,
    SequenceError,
    decode_phases,
    digitize,
    extract_cycles,
)
from .energy import PhaseMetrics, PowerSeries, analyze_cycle, compute_power, integrate_energy
from .metrics import ComparisonReport, EdpReport, RunStatistics, aggregate, compare, compute_edp
from .synth import PhaseProfile, TraceSpec, expected_metrics, synthesize

__all__ = [
    "CaptureFormatError",
    "CaptureMeta",
    "ComparisonReport",
    "DigitizerConfig",
    "EdpReport",
    "GlitchError",
    "InferenceCycle",
    "Phase",
    "PhaseMetrics",
    "PhaseProfile",
    "PhaseWindow",
    "PowerSeries",
    "RunStatistics",
    "SequenceError",
    "TraceSpec",
    "WaveformCapture",
    "aggregate",
    "analyze_cycle",
    "compare",
    "compute_edp",
    "compute_power",
    "decode_phases",
    "digitize",
    "expected_metrics",
    "extract_cycles",
    "integrate_energy",
    "parse_capture",
    "synthesize",
    "write_capture",
]
