"""Capture -> statistics pipeline shared by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass

from .capture import WaveformCapture
from .decode import CycleExtraction, DigitizerConfig, PhaseWindow, decode_capture, extract_cycles
from .energy import CycleMetrics, PowerSeries, analyze_cycle, compute_power
from .metrics import RunStatistics, aggregate


class NoCyclesError(ValueError):
    pass


@dataclass
class Analysis:
    windows: list[PhaseWindow]
    extraction: CycleExtraction
    power: PowerSeries
    cycle_metrics: list[CycleMetrics]
    stats: RunStatistics


def digitizer_config(channel, threshold: float | None, hysteresis: float | None) -> DigitizerConfig | None:
    """Config from optional CLI overrides; unset values fall back to channel-derived defaults."""
    if threshold is None and hysteresis is None:
        return None
    auto = DigitizerConfig.for_channel(channel)
    return DigitizerConfig(
        threshold=auto.threshold if threshold is None else threshold,
        hysteresis=auto.hysteresis if hysteresis is None else hysteresis,
    )


def analyze_capture(capture: WaveformCapture, *, threshold: float | None = None,
                    hysteresis: float | None = None, max_cycles: int | None = None) -> Analysis:
    """Digitize, decode, segment and aggregate one capture.

    Raises:
        GlitchError, SequenceError: the trigger lines do not decode cleanly.
        NoCyclesError: no complete Pre -> Inference -> Post cycle was found.
    """
    cfg1 = digitizer_config(capture.trig1, threshold, hysteresis)
    cfg2 = digitizer_config(capture.trig2, threshold, hysteresis)
    windows = decode_capture(capture, cfg1, cfg2)
    extraction = extract_cycles(windows)
    cycles = extraction.cycles
    if max_cycles is not None:
        cycles = cycles[:max_cycles]
    if not cycles:
        raise NoCyclesError("no complete inference cycles")
    power = compute_power(capture)
    per_cycle = [analyze_cycle(capture, c, power) for c in cycles]
    stats = aggregate(per_cycle, capture.meta.config_name, n_discarded=len(extraction.discarded))
    return Analysis(windows, extraction, power, per_cycle, stats)
