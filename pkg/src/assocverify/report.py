"""Rendering of verification results as CSV, JSON and markdown tables.

Percentages are printed with two decimals; undefined ones (zero
denominator) print as ``n/a``. JSON output also carries the unrounded
fractions. Every rendering can embed the run manifest checksum so a report
can be traced back to its inputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Sequence

from . import __version__
from .cooccur import CoverageRow
from .genharness import ConsistencyRow
from .termverify import TermAccuracyReport

__all__ = [
    "FORMATS",
    "ReportFormatError",
    "RunManifest",
    "emit_consistency",
    "emit_coverage",
    "emit_term_accuracy",
    "pct",
]

FORMATS = ("csv", "json", "markdown")
NA = "n/a"


class ReportFormatError(ValueError):
    pass


def pct(fraction: float | None) -> str:
    return NA if fraction is None else f"{100 * fraction:.2f}"


def _num(value: float | None) -> str:
    return NA if value is None else f"{value:.2f}"


def _check(fmt: str) -> str:
    fmt = {"md": "markdown"}.get(fmt, fmt)
    if fmt not in FORMATS:
        raise ReportFormatError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    return fmt


def _csv(header: Sequence[str], rows: Iterable[Sequence], checksum: str | None) -> bytes:
    buf = io.StringIO()
    if checksum:
        buf.write(f"# manifest_sha256: {checksum}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _markdown(header: Sequence[str], rows: Iterable[Sequence], align: str) -> str:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join("---:" if a == "r" else "---" for a in align) + "|")
    lines += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def _blank_repeats(rows: list[list], col: int = 0) -> list[list]:
    # multirow look: show a group label only on its first row
    out, prev = [], None
    for row in rows:
        row = list(row)
        if row[col] == prev:
            row[col] = ""
        else:
            prev = row[col]
        out.append(row)
    return out


def _md_doc(tables: list[str], checksum: str | None) -> bytes:
    head = f"<!-- manifest_sha256: {checksum} -->\n\n" if checksum else ""
    return (head + "\n".join(tables)).encode("utf-8")


def _json(payload: dict, checksum: str | None) -> bytes:
    doc = {"manifest_sha256": checksum, **payload} if checksum else payload
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def emit_term_accuracy(
    reports: TermAccuracyReport | Sequence[TermAccuracyReport],
    fmt: str,
    manifest_checksum: str | None = None,
) -> bytes:
    fmt = _check(fmt)
    if isinstance(reports, TermAccuracyReport):
        reports = [reports]
    rows = [row for rep in reports for row in rep.rows]
    if fmt == "csv":
        return _csv(
            ["category", "feature", "numerator", "denominator", "percentage"],
            ([r.category, r.feature, r.numerator, r.denominator, pct(r.fraction)] for r in rows),
            manifest_checksum,
        )
    if fmt == "json":
        return _json(
            {
                "datasets": [
                    {
                        "kind": rep.kind.value,
                        "record_count": rep.record_count,
                        "duplicate_count": rep.duplicate_count,
                        "rows": [
                            {
                                "category": r.category,
                                "feature": r.feature,
                                "key": r.key,
                                "numerator": r.numerator,
                                "denominator": r.denominator,
                                "fraction": r.fraction,
                                "percentage": pct(r.fraction),
                            }
                            for r in rep.rows
                        ],
                    }
                    for rep in reports
                ]
            },
            manifest_checksum,
        )
    body = _blank_repeats([[r.category, r.feature, pct(r.fraction)] for r in rows])
    table = _markdown(["Category", "Feature Verified", "Accuracy (%)"], body, "llr")
    return _md_doc([table], manifest_checksum)


def emit_coverage(
    rows: Sequence[CoverageRow], fmt: str, manifest_checksum: str | None = None
) -> bytes:
    fmt = _check(fmt)
    if fmt == "csv":
        return _csv(
            [
                "Association Type",
                "Time Period",
                "Records",
                "Verified",
                "Average Frequency",
                "Unverified Links (%)",
                "Verified Links (%)",
            ],
            (
                [
                    r.kind.display,
                    r.period,
                    r.record_count,
                    r.verified_count,
                    _num(r.avg_frequency),
                    pct(r.unverified_pct),
                    pct(r.verified_pct),
                ]
                for r in rows
            ),
            manifest_checksum,
        )
    if fmt == "json":
        return _json(
            {
                "hit_ratio_denominator": "corpus_size",
                "rows": [
                    {
                        "association_type": r.kind.display,
                        "kind": r.kind.value,
                        "time_period": r.period,
                        "corpus_size": r.corpus_size,
                        "record_count": r.record_count,
                        "verified_count": r.verified_count,
                        "total_frequency": r.total_frequency,
                        "average_frequency": r.avg_frequency,
                        "verified_fraction": r.verified_pct,
                        "unverified_fraction": r.unverified_pct,
                        "verified_links_pct": pct(r.verified_pct),
                        "unverified_links_pct": pct(r.unverified_pct),
                    }
                    for r in rows
                ],
            },
            manifest_checksum,
        )
    freq = _blank_repeats([[r.kind.display, r.period, _num(r.avg_frequency)] for r in rows])
    links = _blank_repeats(
        [[r.kind.display, r.period, pct(r.unverified_pct), pct(r.verified_pct)] for r in rows]
    )
    return _md_doc(
        [
            _markdown(["Association Type", "Time Period", "Average Frequency"], freq, "llr"),
            _markdown(
                ["Association Type", "Time Period", "Unverified Links (%)", "Verified Links (%)"],
                links,
                "llrr",
            ),
        ],
        manifest_checksum,
    )


def emit_consistency(
    rows: Sequence[ConsistencyRow], fmt: str, manifest_checksum: str | None = None
) -> bytes:
    fmt = _check(fmt)
    cells = [[r.model_name, r.hit_count, pct(r.percentage), r.kind.display] for r in rows]
    header = ["Model", "Count", "Percentage (%)", "Association Type"]
    if fmt == "csv":
        return _csv(header, cells, manifest_checksum)
    if fmt == "json":
        return _json(
            {
                "rows": [
                    {
                        "model": r.model_name,
                        "kind": r.kind.value,
                        "association_type": r.kind.display,
                        "count": r.hit_count,
                        "denominator": r.denominator,
                        "fraction": r.percentage,
                        "percentage": pct(r.percentage),
                        "flagged_empty_corpus": r.flagged,
                    }
                    for r in rows
                ]
            },
            manifest_checksum,
        )
    return _md_doc([_markdown(header, cells, "lrrl")], manifest_checksum)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """Provenance of one run.

    The checksum covers the tool version, command, input checksums and the
    config snapshot, not paths or timestamps, so identical inputs give an
    identical checksum wherever the run happens.
    """

    command: str
    tool_version: str = __version__
    inputs: dict[str, dict[str, str]] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    started_at: str = field(default_factory=_utcnow)
    finished_at: str = ""
    warnings: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def add_input(self, role: str, path: str, sha256: str) -> None:
        self.inputs[role] = {"path": str(path), "sha256": sha256}

    @property
    def checksum(self) -> str:
        core = {
            "tool_version": self.tool_version,
            "command": self.command,
            "inputs": {k: v["sha256"] for k, v in sorted(self.inputs.items())},
            "config": self.config,
        }
        blob = json.dumps(core, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def to_json(self) -> bytes:
        doc = {
            "command": self.command,
            "tool_version": self.tool_version,
            "manifest_sha256": self.checksum,
            "inputs": dict(sorted(self.inputs.items())),
            "config": self.config,
            "stats": self.stats,
            "warnings": self.warnings,
            "started_at": self.started_at,
            "finished_at": self.finished_at or _utcnow(),
        }
        return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
