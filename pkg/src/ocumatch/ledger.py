"""Measured-service accounting: per-algorithm execution counts and credit.

The ledger is a single JSON document at ``<root>/ledger/current``, mutated
only by the job manager (single writer) via atomic replace, so the gateway
can read it concurrently at any time. Credit accrues when an algorithm is
*selected* for a task, not when the task succeeds: a crashed plugin still
earns its developer the micropayment.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path

DEFAULT_UNIT_CREDIT = 0.001


class LedgerError(Exception):
    pass


@dataclass
class LedgerRow:
    developer_id: str
    algorithm_id: str
    modality: str
    executions: int = 0


@dataclass
class LedgerTable:
    rows: list[LedgerRow] = field(default_factory=list)
    unit_credit: float = DEFAULT_UNIT_CREDIT

    def row(self, algorithm_id: str) -> LedgerRow:
        for row in self.rows:
            if row.algorithm_id == algorithm_id:
                return row
        raise LedgerError(f"unknown algorithm: {algorithm_id}")

    def executions(self) -> dict[str, int]:
        return {row.algorithm_id: row.executions for row in self.rows}

    @property
    def total(self) -> int:
        return sum(row.executions for row in self.rows)


def record_execution(table: LedgerTable, algorithm_id: str) -> LedgerTable:
    """Count one more execution for ``algorithm_id``; row must exist already
    (rows are created at registration time, never lazily)."""
    table.row(algorithm_id).executions += 1
    return table


def _percentage(executions: int, total: int) -> float:
    if total == 0:
        return 0.0
    # Half-up to one decimal, computed on the exact fraction so reporting
    # matches what a human would do by hand (76.875 -> 76.9).
    exact = Decimal(executions * 100) / Decimal(total)
    return float(exact.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def report(table: LedgerTable) -> list[dict]:
    """Credit report rows, busiest algorithm first."""
    total = table.total
    rows = sorted(table.rows, key=lambda r: (-r.executions, r.algorithm_id))
    return [
        {
            "developer_id": row.developer_id,
            "algorithm_id": row.algorithm_id,
            "modality": row.modality,
            "executions": row.executions,
            "percentage": _percentage(row.executions, total),
            "credit": row.executions * table.unit_credit,
        }
        for row in rows
    ]


# -- persistence --------------------------------------------------------------

def _ledger_path(root: Path | str) -> Path:
    return Path(root) / "ledger" / "current"


def _archive_dir(root: Path | str) -> Path:
    return Path(root) / "ledger" / "archive"


def _to_doc(table: LedgerTable) -> dict:
    return {
        "unit_credit": table.unit_credit,
        "rows": [
            {
                "developer_id": r.developer_id,
                "algorithm_id": r.algorithm_id,
                "modality": r.modality,
                "executions": r.executions,
            }
            for r in table.rows
        ],
    }


def _from_doc(doc: dict) -> LedgerTable:
    return LedgerTable(
        rows=[LedgerRow(**row) for row in doc.get("rows", [])],
        unit_credit=doc.get("unit_credit", DEFAULT_UNIT_CREDIT),
    )


def save(root: Path | str, table: LedgerTable) -> None:
    path = _ledger_path(root)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".current.{os.getpid()}.tmp")
    tmp.write_text(json.dumps(_to_doc(table), sort_keys=True, indent=2))
    os.replace(tmp, path)


def load(root: Path | str) -> LedgerTable:
    path = _ledger_path(root)
    if not path.is_file():
        return LedgerTable()
    return _from_doc(json.loads(path.read_text()))


def ensure_row(root: Path | str, descriptor) -> None:
    """Create a zero-count row for a newly registered algorithm."""
    table = load(root)
    if any(r.algorithm_id == descriptor.algorithm_id for r in table.rows):
        return
    table.rows.append(LedgerRow(developer_id=descriptor.developer_id,
                                algorithm_id=descriptor.algorithm_id,
                                modality=descriptor.modality))
    save(root, table)


def snapshot_and_reset(root: Path | str) -> Path:
    """Archive the live table and zero the counts (billing-period close).

    The archive write is fsync'd before the live counts are reset, so a
    crash can duplicate an archive but never lose counted executions.
    """
    table = load(root)
    directory = _archive_dir(root)
    directory.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    path = directory / f"{stamp}-{time.time_ns() % 1_000_000_000:09d}.json"
    with open(path, "w") as fh:
        json.dump(_to_doc(table), fh, sort_keys=True, indent=2)
        fh.flush()
        os.fsync(fh.fileno())
    for row in table.rows:
        row.executions = 0
    save(root, table)
    return path


def list_archives(root: Path | str) -> list[Path]:
    directory = _archive_dir(root)
    if not directory.is_dir():
        return []
    return sorted(directory.glob("*.json"))


def lifetime_executions(root: Path | str) -> dict[str, int]:
    """Live counts plus every archived period, per algorithm."""
    totals: dict[str, int] = {}
    for path in list_archives(root):
        for row in _from_doc(json.loads(path.read_text())).rows:
            totals[row.algorithm_id] = totals.get(row.algorithm_id, 0) + row.executions
    for row in load(root).rows:
        totals[row.algorithm_id] = totals.get(row.algorithm_id, 0) + row.executions
    return totals
