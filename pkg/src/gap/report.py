"""Report rendering: delimited files plus figures.

`write_report` materializes a quality report into a directory:

    stats.csv                one metric,value row per corpus statistic
    literal_predicates.csv   allowlisted literal predicate counts
    violations.csv           one row per lint finding
    level_counts.png         nanopubs per level, bar chart
    literal_fraction.png     literal vs IRI objects, annotated bar
    violations_by_rule.png   findings per rule (only when there are any)

Figures render through the Agg backend so the module works headless.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .quality import QualityReport  # noqa: E402

STATS_CSV = "stats.csv"
LITERALS_CSV = "literal_predicates.csv"
VIOLATIONS_CSV = "violations.csv"
LEVELS_PNG = "level_counts.png"
FRACTION_PNG = "literal_fraction.png"
RULES_PNG = "violations_by_rule.png"

_LEVEL_ORDER = ("organism", "assembly", "article")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _level_items(report: QualityReport) -> list[tuple[str, int]]:
    items = [(lvl, report.nanopubs_per_level.get(lvl, 0)) for lvl in _LEVEL_ORDER]
    for lvl, count in sorted(report.nanopubs_per_level.items()):
        if lvl not in _LEVEL_ORDER:
            items.append((lvl, count))
    return items


def write_stats_csv(report: QualityReport, path: Path) -> None:
    rows = [
        ["total_nanopubs", report.total_nanopubs],
        ["total_quads", report.total_quads],
        ["literal_quads", report.literal_quads],
        ["literal_fraction", f"{report.literal_fraction:.6f}"],
    ]
    rows += [[f"nanopubs_{lvl}", count] for lvl, count in _level_items(report)]
    rows.append(["violations", len(report.violations)])
    _write_csv(path, ["metric", "value"], rows)


def write_violations_csv(report: QualityReport, path: Path) -> None:
    rows = [[v.rule, v.nanopub.value, v.message] for v in report.violations]
    _write_csv(path, ["rule", "nanopub", "message"], rows)


def _bar_figure(path: Path, labels: list[str], values: list[int],
                title: str, color: str = "#4878a8") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(labels, values, color=color)
    ax.set_title(title)
    ax.set_ylabel("count")
    for i, value in enumerate(values):
        ax.text(i, value, str(value), ha="center", va="bottom", fontsize=9)
    ax.margins(y=0.15)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _fraction_figure(report: QualityReport, path: Path) -> None:
    literal = report.literal_quads
    iri = report.total_quads - report.literal_quads
    fig, ax = plt.subplots(figsize=(6, 2.2))
    ax.barh(["objects"], [literal], color="#c46d4e", label="literal")
    ax.barh(["objects"], [iri], left=[literal], color="#4878a8", label="IRI")
    ax.set_title(f"literal objects: {report.literal_fraction:.2%} of "
                 f"{report.total_quads} quads")
    ax.legend(loc="lower right", fontsize=8)
    ax.set_xlim(0, max(report.total_quads, 1))
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def write_report(report: QualityReport, directory) -> list[Path]:
    """Write delimited files and figures; returns the paths created."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    created = []

    stats_path = out / STATS_CSV
    write_stats_csv(report, stats_path)
    created.append(stats_path)

    literals_path = out / LITERALS_CSV
    _write_csv(literals_path, ["predicate", "count"],
               sorted(report.allowlisted_literals.items()))
    created.append(literals_path)

    violations_path = out / VIOLATIONS_CSV
    write_violations_csv(report, violations_path)
    created.append(violations_path)

    levels = _level_items(report)
    levels_path = out / LEVELS_PNG
    _bar_figure(levels_path, [l for l, _ in levels], [c for _, c in levels],
                "nanopublications per level")
    created.append(levels_path)

    fraction_path = out / FRACTION_PNG
    _fraction_figure(report, fraction_path)
    created.append(fraction_path)

    if report.violations:
        per_rule: dict[str, int] = {}
        for v in report.violations:
            per_rule[v.rule] = per_rule.get(v.rule, 0) + 1
        rules_path = out / RULES_PNG
        _bar_figure(rules_path, list(sorted(per_rule)),
                    [per_rule[r] for r in sorted(per_rule)],
                    "lint findings per rule", color="#b04a4a")
        created.append(rules_path)

    return created
