"""Relative-robustness aggregation and report rendering.

For corruption c with per-severity scores mAP_{c,s} and a clean score
mAP_clean, the relative robustness is

    RR_c = (1/5) * sum_s (1 - (mAP_clean - mAP_{c,s}) / mAP_clean)
         = (1/5) * sum_s mAP_{c,s} / mAP_clean

and mRR is the arithmetic mean of RR_c over the ten corruptions. The report
additionally aggregates the four corruption groups and a per-severity mRR
curve, and renders markdown/CSV tables with two-decimal percentages.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .corruption.severity import (
    ALL_KINDS,
    CORRUPTION_GROUPS,
    GROUP_NAMES,
    SEVERITY_LEVELS,
    CorruptionKind,
)
from .evaluation import MetricSet


@dataclass(frozen=True)
class RunRecord:
    corruption: CorruptionKind
    severity: int
    metrics: MetricSet


@dataclass(frozen=True)
class CleanRecord:
    metrics: MetricSet


@dataclass
class GroupSummary:
    name: str
    mean_map: Optional[float]
    mean_mar: Optional[float]
    mrr: Optional[float]


@dataclass
class RobustnessReport:
    clean: CleanRecord
    rr_per_corruption: dict[CorruptionKind, Optional[float]]
    corruption_map: dict[CorruptionKind, Optional[float]]  # severity-mean mAP
    corruption_mar: dict[CorruptionKind, Optional[float]]
    groups: list[GroupSummary]
    overall_map: Optional[float]
    overall_mar: Optional[float]
    mrr: Optional[float]
    per_severity_mrr: dict[int, Optional[float]] = field(default_factory=dict)
    cells: dict[tuple[CorruptionKind, int], MetricSet] = field(default_factory=dict)


def relative_robustness(clean_map: float, severity_maps: Sequence[float]) -> float:
    """RR for one corruption from its five per-severity mAP values."""
    if clean_map <= 0:
        raise ValueError(f"clean mAP must be > 0, got {clean_map}")
    if len(severity_maps) != len(SEVERITY_LEVELS):
        raise ValueError(
            f"expected {len(SEVERITY_LEVELS)} severity values, got {len(severity_maps)}"
        )
    return math.fsum(severity_maps) / len(severity_maps) / clean_map


def mean_rr(rr_values: Sequence[float]) -> float:
    """Mean relative robustness over the ten per-corruption RR values."""
    if len(rr_values) != len(ALL_KINDS):
        raise ValueError(f"expected {len(ALL_KINDS)} RR values, got {len(rr_values)}")
    return math.fsum(rr_values) / len(rr_values)


def _mean(values: list[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def build_report(
    clean: CleanRecord, runs: Sequence[RunRecord], allow_partial: bool = False
) -> RobustnessReport:
    """Aggregate a (corruption, severity) metric grid against a clean run.

    Strict mode requires the full 10x5 grid; with ``allow_partial`` missing
    cells render as NA and drop out of every average they would feed.
    """
    clean_map = clean.metrics.mAP
    if clean_map is None or clean_map <= 0:
        raise ValueError("clean mAP must be defined and > 0 to compute robustness")

    cells: dict[tuple[CorruptionKind, int], RunRecord] = {}
    for run in runs:
        key = (CorruptionKind(run.corruption), run.severity)
        if key in cells:
            raise ValueError(f"duplicate cell for {key[0].value} severity {key[1]}")
        cells[key] = run

    missing = [
        (kind, sev)
        for kind in ALL_KINDS
        for sev in SEVERITY_LEVELS
        if (kind, sev) not in cells
    ]
    if missing and not allow_partial:
        listing = ", ".join(f"{k.value}/{s}" for k, s in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise ValueError(f"missing grid cells: {listing}{more}")

    rr: dict[CorruptionKind, Optional[float]] = {}
    corr_map: dict[CorruptionKind, Optional[float]] = {}
    corr_mar: dict[CorruptionKind, Optional[float]] = {}
    for kind in ALL_KINDS:
        maps = [
            cells[(kind, s)].metrics.mAP
            for s in SEVERITY_LEVELS
            if (kind, s) in cells and cells[(kind, s)].metrics.mAP is not None
        ]
        mars = [
            cells[(kind, s)].metrics.mAR
            for s in SEVERITY_LEVELS
            if (kind, s) in cells and cells[(kind, s)].metrics.mAR is not None
        ]
        corr_map[kind] = _mean(maps)
        corr_mar[kind] = _mean(mars)
        rr[kind] = corr_map[kind] / clean_map if corr_map[kind] is not None else None

    groups = []
    for group_name in GROUP_NAMES:
        members = [k for k in ALL_KINDS if CORRUPTION_GROUPS[k] == group_name]
        gmaps = [corr_map[k] for k in members if corr_map[k] is not None]
        gmars = [corr_mar[k] for k in members if corr_mar[k] is not None]
        grrs = [rr[k] for k in members if rr[k] is not None]
        groups.append(
            GroupSummary(
                name=group_name,
                mean_map=_mean(gmaps),
                mean_mar=_mean(gmars),
                mrr=_mean(grrs),
            )
        )

    per_severity: dict[int, Optional[float]] = {}
    for sev in SEVERITY_LEVELS:
        ratios = [
            cells[(kind, sev)].metrics.mAP / clean_map
            for kind in ALL_KINDS
            if (kind, sev) in cells and cells[(kind, sev)].metrics.mAP is not None
        ]
        per_severity[sev] = _mean(ratios)

    defined_rr = [rr[k] for k in ALL_KINDS if rr[k] is not None]
    defined_map = [corr_map[k] for k in ALL_KINDS if corr_map[k] is not None]
    defined_mar = [corr_mar[k] for k in ALL_KINDS if corr_mar[k] is not None]

    return RobustnessReport(
        clean=clean,
        rr_per_corruption=rr,
        corruption_map=corr_map,
        corruption_mar=corr_mar,
        groups=groups,
        overall_map=_mean(defined_map),
        overall_mar=_mean(defined_mar),
        mrr=_mean(defined_rr),
        per_severity_mrr=per_severity,
        cells={key: run.metrics for key, run in cells.items()},
    )


def _pct(value: Optional[float]) -> str:
    return "NA" if value is None else f"{100.0 * value:.2f}"


def render(report: RobustnessReport, fmt: str = "markdown") -> str:
    """Deterministic text table for a report; ``fmt`` is markdown or csv."""
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"unknown format {fmt!r}")

    headers = ["Clean mAP", "Clean mAR", "Overall mAP", "Overall mAR", "Overall mRR"]
    values = [
        _pct(report.clean.metrics.mAP),
        _pct(report.clean.metrics.mAR),
        _pct(report.overall_map),
        _pct(report.overall_mar),
        _pct(report.mrr),
    ]
    for group in report.groups:
        headers += [f"{group.name} mAP", f"{group.name} mAR", f"{group.name} mRR"]
        values += [_pct(group.mean_map), _pct(group.mean_mar), _pct(group.mrr)]

    if fmt == "markdown":
        lines = [
            "| " + " | ".join(headers) + " |",
            "| " + " | ".join("---" for _ in headers) + " |",
            "| " + " | ".join(values) + " |",
            "",
            "| Corruption | mAP | mAR | RR |",
            "| --- | --- | --- | --- |",
        ]
        for kind in ALL_KINDS:
            lines.append(
                f"| {kind.value} | {_pct(report.corruption_map[kind])} "
                f"| {_pct(report.corruption_mar[kind])} "
                f"| {_pct(report.rr_per_corruption[kind])} |"
            )
        lines.append("")
        lines.append("| Severity | mRR |")
        lines.append("| --- | --- |")
        for sev in SEVERITY_LEVELS:
            lines.append(f"| {sev} | {_pct(report.per_severity_mrr.get(sev))} |")
        return "\n".join(lines) + "\n"

    # CSV: one row per (corruption, severity) cell with the full metric
    # columns, then summary rows (clean, overall, per corruption, groups,
    # per severity)
    metric_names = list(MetricSet.FIELDS)
    out = io.StringIO()
    out.write("row_type,corruption,severity," + ",".join(metric_names) + ",mRR\n")

    def metric_cols(metrics: Optional[MetricSet]) -> str:
        if metrics is None:
            return ",".join("NA" for _ in metric_names)
        return ",".join(_pct(getattr(metrics, name)) for name in metric_names)

    for kind in ALL_KINDS:
        for sev in SEVERITY_LEVELS:
            metrics = report.cells.get((kind, sev))
            out.write(f"cell,{kind.value},{sev},{metric_cols(metrics)},\n")
    out.write(f"clean,,,{metric_cols(report.clean.metrics)},\n")

    def summary_row(row_type, corruption, severity, map_value, mar_value, mrr_value):
        cols = {name: "" for name in metric_names}
        cols["mAP"] = _pct(map_value)
        cols["mAR"] = _pct(mar_value)
        joined = ",".join(cols[name] for name in metric_names)
        out.write(f"{row_type},{corruption},{severity},{joined},{_pct(mrr_value)}\n")

    summary_row("overall", "", "", report.overall_map, report.overall_mar, report.mrr)
    for kind in ALL_KINDS:
        summary_row(
            "corruption_summary", kind.value, "",
            report.corruption_map[kind], report.corruption_mar[kind],
            report.rr_per_corruption[kind],
        )
    for group in report.groups:
        summary_row("group_summary", group.name, "", group.mean_map, group.mean_mar, group.mrr)
    for sev in SEVERITY_LEVELS:
        cols = ",".join("" for _ in metric_names)
        out.write(f"severity_summary,,{sev},{cols},{_pct(report.per_severity_mrr.get(sev))}\n")
    return out.getvalue()
