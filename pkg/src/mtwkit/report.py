"""Structured pass/fail records and their JSON/CSV persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

TOOL_VERSION = "0.1.0"

PASS = "pass"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    check_id: str
    verdict: str
    n_samples: int = 0
    n_skipped: int = 0
    worst_margin: float = 0.0
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    seed: int = 0
    wall_time: float = 0.0
    tool_version: str = TOOL_VERSION

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "verdict": self.verdict,
            "n_samples": self.n_samples,
            "n_skipped": self.n_skipped,
            "worst_margin": self.worst_margin,
            "witnesses": self.witnesses,
            "details": self.details,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(**d)


def dump_report(reports: list, path: Path, seed: int) -> None:
    doc = {
        "tool_version": TOOL_VERSION,
        "seed": seed,
        "checks": [r.to_dict() for r in reports],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


CSV_COLUMNS_VERSION = "mtwkit-csv-v1"


def dump_csv(rows: list, columns: list, path: Path) -> None:
    """Write plot data: one header comment, one header row, %.17g floats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {CSV_COLUMNS_VERSION}", ",".join(columns)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, float):
                cells.append(format(v, ".17g"))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
