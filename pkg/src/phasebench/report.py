"""JSON report documents and their human-readable renderings."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .metrics import PHASE_KEYS, PHASE_LABELS, ComparisonReport, RunStatistics

SCHEMA_NAME = "phasebench-report"
SCHEMA_VERSION = "1.0"
SCHEMA = f"{SCHEMA_NAME}/{SCHEMA_VERSION}"
KINDS = ("stats", "comparison")

UJ = 1e6  # joules -> microjoules
US = 1e6  # seconds -> microseconds


class ReportError(ValueError):
    pass


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


@dataclass
class ReportDocument:
    kind: str
    data: dict
    inputs: dict[str, str] = field(default_factory=dict)
    tool_version: str = __version__
    schema: str = SCHEMA
    render: dict = field(default_factory=lambda: {"energy_unit": "uJ", "latency_unit": "us", "edp_unit": "J*s"})

    def to_dict(self) -> dict:
        return {
            "schema": self.schema,
            "tool_version": self.tool_version,
            "kind": self.kind,
            "inputs": dict(self.inputs),
            "data": self.data,
            "render": dict(self.render),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ReportDocument":
        schema = d.get("schema", "")
        name, _, version = str(schema).partition("/")
        if name != SCHEMA_NAME:
            raise ReportError(f"not a phasebench report (schema {schema!r})")
        if version.split(".")[0] != SCHEMA_VERSION.split(".")[0]:
            raise ReportError(f"unsupported report schema version {version!r}")
        if d.get("kind") not in KINDS:
            raise ReportError(f"unknown report kind {d.get('kind')!r}")
        return cls(
            kind=d["kind"],
            data=d["data"],
            inputs=dict(d.get("inputs", {})),
            tool_version=d.get("tool_version", ""),
            schema=schema,
            render=dict(d.get("render", {})),
        )

    @classmethod
    def for_stats(cls, stats: RunStatistics, inputs: dict[str, str] | None = None) -> "ReportDocument":
        return cls("stats", stats.to_dict(), inputs or {})

    @classmethod
    def for_comparisons(cls, reports: list[ComparisonReport], inputs: dict[str, str] | None = None) -> "ReportDocument":
        data = {
            "comparisons": [r.to_dict() for r in reports],
            "mean_total_redp": mean_total_redp(reports),
        }
        return cls("comparison", data, inputs or {})

    def stats(self) -> RunStatistics:
        if self.kind != "stats":
            raise ReportError("report does not contain run statistics")
        return RunStatistics.from_dict(self.data)

    def comparisons(self) -> list[ComparisonReport]:
        if self.kind != "comparison":
            raise ReportError("report does not contain a comparison")
        return [ComparisonReport.from_dict(c) for c in self.data["comparisons"]]


def load_report(path) -> ReportDocument:
    try:
        return ReportDocument.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise ReportError(f"{path}: invalid JSON: {exc}") from None
    except (KeyError, TypeError) as exc:
        raise ReportError(f"{path}: malformed report: {exc}") from None


def mean_total_redp(reports: list[ComparisonReport]) -> float | None:
    if not reports:
        return None
    return sum(r.redp["total"] for r in reports) / len(reports)


def _keys(d: dict) -> list[str]:
    return [k for k in PHASE_KEYS if k in d] + [k for k in d if k not in PHASE_KEYS]


def render_stats(stats: RunStatistics, fmt: str = "md") -> str:
    keys = _keys(stats.phases)
    if fmt == "json":
        return ReportDocument.for_stats(stats).to_json()
    rows = []
    for k in keys:
        s = stats.phases[k]
        rows.append([PHASE_LABELS.get(k, k), s.mean_energy * UJ, s.std_energy * UJ,
                     s.mean_latency * US, s.std_latency * US])
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["phase", "energy_mean_uJ", "energy_std_uJ", "latency_mean_us", "latency_std_us"])
        for r in rows:
            w.writerow([r[0]] + [f"{v:.6g}" for v in r[1:]])
        return out.getvalue()
    if fmt != "md":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [
        f"## {stats.config_name or 'capture'}: {stats.n_cycles} cycles "
        f"({stats.n_discarded} partial windows discarded)",
        "",
        "| Phase | Energy (µJ) | Latency (µs) |",
        "|---|---|---|",
    ]
    for label, me, se, ml, sl in rows:
        lines.append(f"| {label} | {me:.1f} ± {se:.1f} | {ml:.1f} ± {sl:.1f} |")
    return "\n".join(lines) + "\n"


def _pair_label(r: ComparisonReport) -> str:
    return f"{r.reference.name} vs {r.candidate.name}"


def render_comparisons(reports: list[ComparisonReport], fmt: str = "md") -> str:
    """EDP columns (reference, then candidate) followed by rEDP columns."""
    if fmt == "json":
        return ReportDocument.for_comparisons(reports).to_json()
    keys = _keys(reports[0].redp) if reports else list(PHASE_KEYS)
    mean = mean_total_redp(reports)
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["pair"] + [f"edp_ref_{k}" for k in keys] + [f"edp_cand_{k}" for k in keys]
                   + [f"redp_{k}_pct" for k in keys])
        for r in reports:
            w.writerow([_pair_label(r)]
                       + [f"{r.reference.edp[k]:.6g}" for k in keys]
                       + [f"{r.candidate.edp[k]:.6g}" for k in keys]
                       + [f"{r.redp[k]:.4f}" for k in keys])
        return out.getvalue()
    if fmt != "md":
        raise ValueError(f"unknown format {fmt!r}")
    heads = [PHASE_LABELS.get(k, k) for k in keys]
    lines = [
        "| | " + " | ".join(f"EDP ref {h} (J·s)" for h in heads) + " | "
        + " | ".join(f"EDP cand {h} (J·s)" for h in heads) + " | "
        + " | ".join(f"rEDP {h}" for h in heads) + " |",
        "|---" * (1 + 3 * len(keys)) + "|",
    ]
    for r in reports:
        cells = ([f"{r.reference.edp[k]:.1e}" for k in keys]
                 + [f"{r.candidate.edp[k]:.1e}" for k in keys]
                 + [f"{r.redp[k]:.0f}%" for k in keys])
        lines.append(f"| {_pair_label(r)} | " + " | ".join(cells) + " |")
    if mean is not None and len(reports) > 1:
        lines += ["", f"Mean total rEDP over {len(reports)} pairs: {mean:.1f}%"]
    return "\n".join(lines) + "\n"


def plot_cycle(power, cycle, path, title: str = "") -> None:
    """Save the power trace of one cycle with phase shading as SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colors = {"pre": "tab:orange", "inf": "tab:green", "post": "tab:purple"}
    pad = 0.05 * (cycle.post.t_end - cycle.pre.t_start)
    t = power.times
    sel = (t >= cycle.pre.t_start - pad) & (t <= cycle.post.t_end + pad)

    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot((t[sel] - cycle.pre.t_start) * US, power.p[sel] * 1e3, linewidth=0.7, color="tab:blue")
    for w in cycle.windows:
        ax.axvspan((w.t_start - cycle.pre.t_start) * US, (w.t_end - cycle.pre.t_start) * US,
                   color=colors[w.phase.key], alpha=0.2, label=PHASE_LABELS[w.phase.key])
    ax.set_xlabel("Time (µs)")
    ax.set_ylabel("Core power (mW)")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
