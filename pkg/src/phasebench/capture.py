"""Capture data model and the v1 text capture format.

A capture holds one uniformly sampled record of the differential shunt
voltage and the two trigger channels, plus the acquisition metadata needed
to turn volts into watts.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

MAGIC = "# phasebench-capture v1"
FORMAT_VERSION = 1
TRIG_ENCODINGS = ("analog", "digital")

# Relative tolerance when checking an explicit time column against sample_rate.
TIME_COLUMN_RTOL = 1e-6


class CaptureFormatError(ValueError):
    """Raised for malformed capture files; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class CaptureMeta:
    sample_rate: float
    v_core: float
    r_shunt: float
    r_shunt_tol: float = 0.01
    config_name: str = ""
    freq_info: dict[str, float] = field(default_factory=dict)
    trig_encoding: str = "analog"

    def __post_init__(self):
        for name in ("sample_rate", "v_core", "r_shunt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive")
        if not (0 <= self.r_shunt_tol < 0.5):
            raise ValueError("r_shunt_tol must be in [0, 0.5)")
        if self.trig_encoding not in TRIG_ENCODINGS:
            raise ValueError(f"unknown trig_encoding {self.trig_encoding!r}")


@dataclass(frozen=True, eq=False)
class WaveformCapture:
    """Shunt voltage drop and trigger channels sampled on a common clock.

    Sample ``i`` is taken at ``t0_offset + i / meta.sample_rate``.
    """

    meta: CaptureMeta
    v_shunt: np.ndarray
    trig1: np.ndarray
    trig2: np.ndarray
    t0_offset: float = 0.0

    def __post_init__(self):
        arrays = []
        for name in ("v_shunt", "trig1", "trig2"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"{name} must be one-dimensional")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            arrays.append(arr)
        n = len(arrays[0])
        if any(len(a) != n for a in arrays):
            raise ValueError("channels must have identical length")
        if n < 2:
            raise ValueError("a capture needs at least 2 samples")

    def __len__(self) -> int:
        return len(self.v_shunt)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WaveformCapture):
            return NotImplemented
        return (
            self.meta == other.meta
            and self.t0_offset == other.t0_offset
            and np.array_equal(self.v_shunt, other.v_shunt)
            and np.array_equal(self.trig1, other.trig1)
            and np.array_equal(self.trig2, other.trig2)
        )

    @property
    def sample_period(self) -> float:
        return 1.0 / self.meta.sample_rate

    @property
    def times(self) -> np.ndarray:
        return self.t0_offset + np.arange(len(self)) / self.meta.sample_rate

    def time_at(self, i: int) -> float:
        return self.t0_offset + i / self.meta.sample_rate

    @property
    def t_end(self) -> float:
        """Timestamp of the last sample."""
        return self.time_at(len(self) - 1)


# header key -> (CaptureMeta field, converter)
_HEADER_KEYS = {
    "sample_rate_hz": ("sample_rate", float),
    "v_core_volts": ("v_core", float),
    "r_shunt_ohms": ("r_shunt", float),
    "r_shunt_tol": ("r_shunt_tol", float),
    "trig_encoding": ("trig_encoding", str),
    "config_name": ("config_name", str),
}
_REQUIRED = ("sample_rate_hz", "v_core_volts", "r_shunt_ohms")
_FREQ_PREFIX = "freq_"
_FREQ_SUFFIX = "_hz"


def _fmt(x: float) -> str:
    # repr gives the shortest string that round-trips exactly (>= 9 sig. digits
    # whenever needed).
    return repr(float(x))


def _parse_float(text: str, what: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise CaptureFormatError(f"non-numeric {what}: {text!r}", line) from None


def parse_capture(source: IO[str] | Iterable[str], ch_pair: bool = False) -> WaveformCapture:
    """Read a capture in format v1.

    Args:
        source: text stream (or iterable of lines).
        ch_pair: accept ``ch1,ch2`` columns instead of ``v_shunt`` and
            subtract them on ingest.

    Raises:
        CaptureFormatError: on any malformed input, with the line number.
    """
    lines = iter(source)
    lineno = 0

    def next_line():
        nonlocal lineno
        for raw in lines:
            lineno += 1
            text = raw.rstrip("\r\n")
            if text.strip():
                return text
        return None

    first = next_line()
    if first is None:
        raise CaptureFormatError("empty capture", 1)
    magic = first.strip()
    if not magic.startswith("# phasebench-capture"):
        raise CaptureFormatError("missing '# phasebench-capture v1' header", lineno)
    version = magic[len("# phasebench-capture"):].strip()
    if version != f"v{FORMAT_VERSION}":
        raise CaptureFormatError(f"unknown format version {version!r}", lineno)

    header: dict[str, str] = {}
    header_lines: dict[str, int] = {}
    text = next_line()
    while text is not None and text.lstrip().startswith("#"):
        body = text.lstrip()[1:].strip()
        if body:
            key, sep, value = body.partition(":")
            if not sep or not key.strip():
                raise CaptureFormatError(f"malformed header line {text!r}", lineno)
            key = key.strip()
            header[key] = value.strip()
            header_lines[key] = lineno
        text = next_line()

    if text is None:
        raise CaptureFormatError("missing column row", lineno + 1)
    column_line = lineno
    columns = [c.strip() for c in text.split(",")]

    meta_kwargs: dict = {}
    freq_info: dict[str, float] = {}
    t0_offset = 0.0
    for key in _REQUIRED:
        if key not in header:
            raise CaptureFormatError(f"missing required metadata key {key!r}", column_line)
    for key, value in header.items():
        line = header_lines[key]
        if key in _HEADER_KEYS:
            name, conv = _HEADER_KEYS[key]
            meta_kwargs[name] = _parse_float(value, key, line) if conv is float else value
        elif key == "t0_offset_s":
            t0_offset = _parse_float(value, key, line)
        elif key.startswith(_FREQ_PREFIX) and key.endswith(_FREQ_SUFFIX):
            label = key[len(_FREQ_PREFIX):-len(_FREQ_SUFFIX)]
            freq_info[label] = _parse_float(value, key, line)
        # unknown keys are ignored so instruments can annotate freely
    meta_kwargs["freq_info"] = freq_info
    try:
        meta = CaptureMeta(**meta_kwargs)
    except ValueError as exc:
        line = column_line
        for key, (name, _) in _HEADER_KEYS.items():
            if str(exc).startswith(name + " ") and key in header_lines:
                line = header_lines[key]
        raise CaptureFormatError(str(exc), line) from None

    if ch_pair:
        wanted = ["ch1", "ch2", "trig1", "trig2"]
    else:
        wanted = ["v_shunt", "trig1", "trig2"]
    for name in wanted:
        if name not in columns:
            raise CaptureFormatError(f"missing column {name!r}", column_line)
    index = {name: columns.index(name) for name in wanted}
    time_idx = columns.index("time") if "time" in columns else None

    rows: list[list[float]] = []
    times: list[float] = []
    while True:
        text = next_line()
        if text is None:
            break
        if text.lstrip().startswith("#"):
            continue
        cells = text.split(",")
        if len(cells) != len(columns):
            raise CaptureFormatError(
                f"ragged row: expected {len(columns)} cells, got {len(cells)}", lineno
            )
        rows.append([_parse_float(cells[index[n]].strip(), f"cell in column {n!r}", lineno) for n in wanted])
        if time_idx is not None:
            times.append(_parse_float(cells[time_idx].strip(), "time cell", lineno))

    if len(rows) < 2:
        raise CaptureFormatError("a capture needs at least 2 data rows", lineno)
    data = np.asarray(rows, dtype=float)
    if ch_pair:
        v_shunt = data[:, 0] - data[:, 1]
        trig1, trig2 = data[:, 2], data[:, 3]
    else:
        v_shunt, trig1, trig2 = data[:, 0], data[:, 1], data[:, 2]

    if time_idx is not None:
        t = np.asarray(times)
        expected = t[0] + np.arange(len(t)) / meta.sample_rate
        span = expected[-1] - expected[0]
        bad = np.flatnonzero(np.abs(t - expected) > TIME_COLUMN_RTOL * span)
        if bad.size:
            raise CaptureFormatError(
                f"time column disagrees with sample_rate at data row {bad[0]}",
                column_line + 1 + int(bad[0]),
            )
        t0_offset = float(t[0])

    return WaveformCapture(meta, v_shunt, trig1, trig2, t0_offset=t0_offset)


def write_capture(capture: WaveformCapture, dest: IO[str] | None = None) -> str | None:
    """Render ``capture`` in format v1.

    Writes to ``dest`` when given, otherwise returns the text.
    """
    out = dest if dest is not None else io.StringIO()
    meta = capture.meta
    out.write(MAGIC + "\n")
    out.write(f"# sample_rate_hz: {_fmt(meta.sample_rate)}\n")
    out.write(f"# v_core_volts: {_fmt(meta.v_core)}\n")
    out.write(f"# r_shunt_ohms: {_fmt(meta.r_shunt)}\n")
    out.write(f"# r_shunt_tol: {_fmt(meta.r_shunt_tol)}\n")
    out.write(f"# trig_encoding: {meta.trig_encoding}\n")
    if meta.config_name:
        out.write(f"# config_name: {meta.config_name}\n")
    for label, hz in meta.freq_info.items():
        out.write(f"# {_FREQ_PREFIX}{label}{_FREQ_SUFFIX}: {_fmt(hz)}\n")
    if capture.t0_offset != 0.0:
        out.write(f"# t0_offset_s: {_fmt(capture.t0_offset)}\n")
    out.write("v_shunt,trig1,trig2\n")
    for v, a, b in zip(capture.v_shunt.tolist(), capture.trig1.tolist(), capture.trig2.tolist()):
        out.write(f"{v!r},{a!r},{b!r}\n")
    if dest is None:
        return out.getvalue()
    return None


def read_capture(path, ch_pair: bool = False) -> WaveformCapture:
    with open(path, encoding="utf-8") as f:
        return parse_capture(f, ch_pair=ch_pair)


def save_capture(capture: WaveformCapture, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        write_capture(capture, f)
