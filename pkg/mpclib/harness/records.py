"""
Run records, as JSON documents and as flat CSV rows.

Units: rounds are counts of synchronous rounds, memory is in words of
ceil(log2 n) bits, wall time is in seconds.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, TextIO

from mpclib.constants import SCHEMA_VERSION

__all__ = [
    "CONFIG_COLUMNS",
    "VERDICT_COLUMNS",
    "METRIC_COLUMNS",
    "CSV_COLUMNS",
    "RunRecord",
    "write_csv",
]

CONFIG_COLUMNS = (
    "graph",
    "n",
    "m",
    "max_degree",
    "algorithm",
    "engine",
    "beta",
    "schedule",
    "epsilon",
    "memory_mode",
    "seed",
    "f",
    "c",
    "delta",
    "force_ell",
)
VERDICT_COLUMNS = (
    "set_size",
    "independent",
    "dominated",
    "passed",
    "audit_passed",
    "error",
)
METRIC_COLUMNS = (
    "congest_rounds",
    "mpc_rounds",
    "max_sent_words",
    "max_recv_words",
    "peak_machine_words",
    "peak_total_words",
    "machines",
    "words_per_machine",
    "predicted_rounds",
    "stepped_mpc_rounds",
    "floor_breach",
    "wall_seconds",
)
CSV_COLUMNS = CONFIG_COLUMNS + VERDICT_COLUMNS + METRIC_COLUMNS


@dataclass
class RunRecord:
    config: dict[str, Any]
    result: dict[str, Any] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    error: str | None = None
    version: str = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.result.get("passed", False))

    @property
    def audit_passed(self) -> bool:
        return bool(self.metrics.get("audit_passed", True))

    def to_json(self) -> dict:
        document = {
            "config": self.config,
            "result": self.result,
            "metrics": self.metrics,
            "version": self.version,
        }
        if self.error is not None:
            document["error"] = self.error
        return document

    def dumps(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json(), indent=indent, sort_keys=False)

    @classmethod
    def from_json(cls, document: dict) -> RunRecord:
        return cls(
            config=document["config"],
            result=document.get("result", {}),
            metrics=document.get("metrics", {}),
            error=document.get("error"),
            version=document.get("version", SCHEMA_VERSION),
        )

    def row(self) -> dict[str, Any]:
        row = {key: self.config.get(key) for key in CONFIG_COLUMNS}
        row.update({
            "set_size": self.result.get("set_size"),
            "independent": self.result.get("independent"),
            "dominated": self.result.get("dominated"),
            "passed": self.passed,
            "audit_passed": self.audit_passed,
            "error": self.error,
        })
        row.update({key: self.metrics.get(key) for key in METRIC_COLUMNS})
        return row


def write_csv(
    stream: TextIO,
    records: Iterable[RunRecord],
    summary: dict[str, Any] | None = None,
) -> None:
    """One row per record in grid order, then an optional summary row."""
    columns = list(CSV_COLUMNS)
    if summary:
        columns += [key for key in summary if key not in columns]
    writer = csv.DictWriter(stream, fieldnames=columns, restval="", lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(record.row())
    if summary:
        writer.writerow(summary)
