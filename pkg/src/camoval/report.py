"""Evaluation report assembly: deterministic structured text plus a CSV mirror.

The text body is byte-stable for identical inputs and config; the generation
timestamp lives on a single header line so report bodies can be diffed or
hashed directly. Floats are printed with round-trip precision (repr) so every
aggregate can be recomputed exactly from the per-image rows.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone

TOOLKIT_VERSION = "0.1.0"


def fmt(value) -> str:
    if value is None:
        return "na"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class EvalReport:
    """Container for everything a report run produced."""

    command: str
    config: dict = field(default_factory=dict)
    row_fields: tuple[str, ...] = ()
    rows: list[dict] = field(default_factory=list)
    aggregates: list[tuple[str, dict]] = field(default_factory=list)  # (scope, values)
    failures: list[tuple[str, str]] = field(default_factory=list)     # (id, reason)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def body(self) -> str:
        out = io.StringIO()
        out.write(f"toolkit_version: {TOOLKIT_VERSION}\n")
        out.write("\n[config]\n")
        for key in sorted(self.config):
            out.write(f"{key}: {fmt(self.config[key])}\n")
        if self.notes:
            out.write("\n[notes]\n")
            for note in self.notes:
                out.write(f"- {note}\n")
        if self.aggregates:
            out.write("\n[aggregates]\n")
            for scope, values in self.aggregates:
                pairs = " ".join(f"{k}={fmt(v)}" for k, v in values.items())
                out.write(f"{scope}: {pairs}\n")
        if self.row_fields:
            out.write("\n[rows]\n")
            out.write(",".join(self.row_fields) + "\n")
            for row in self.rows:
                out.write(",".join(fmt(row.get(f)) for f in self.row_fields) + "\n")
        out.write("\n[failures]\n")
        if self.failures:
            for rid, reason in self.failures:
                out.write(f"{rid}: {reason}\n")
        else:
            out.write("none\n")
        return out.getvalue()

    def render(self) -> str:
        stamp = datetime.now(timezone.utc).isoformat()
        return f"camoval {self.command} report\ngenerated_at: {stamp}\n" + self.body()

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
        if self.row_fields:
            with open(csv_path(path), "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(self.row_fields)
                for row in self.rows:
                    writer.writerow([fmt(row.get(f)) for f in self.row_fields])


def csv_path(report_path: str) -> str:
    if report_path.endswith(".txt"):
        return report_path[:-4] + ".csv"
    return report_path + ".csv"


def strip_timestamp(text: str) -> str:
    """Report text without its generated_at header line (for byte comparison)."""
    lines = text.splitlines(keepends=True)
    return "".join(line for line in lines if not line.startswith("generated_at:"))
