"""File-backed queues with atomic record transitions.

Every component of the service (gateway, job manager, scheduler, workers)
communicates only through these queue directories. A record is one JSON
document in one file; moving a record between processing stages is a single
``os.rename``, which is atomic as long as all queues live on one filesystem.
That single primitive gives us crash tolerance for free: a process may die
at any point and the record it was handling is still in exactly one
directory.

Directory layout under a queue root::

    <root>/users/<user>/{job-input,job-running,job-output,task-input,task-output}/
    <root>/global/{task-input,task-running,task-output}/
    <root>/archive/{tasks,orphan-tasks}/

Running state for tasks is kept only in the global running queue; per-user
queues hold tasks only before scheduling and after completion.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

JOB_STAGES = ("job-input", "job-running", "job-output")
TASK_STAGES = ("task-input", "task-running", "task-output")
USER_STAGES = JOB_STAGES + ("task-input", "task-output")
GLOBAL_STAGES = TASK_STAGES

# Records in a running queue older than this are presumed orphaned by a dead
# process and are eligible for sweep-back to the matching input queue.
DEFAULT_ORPHAN_TIMEOUT_S = 300.0


class QueueError(Exception):
    """Raised for unknown queues or failed record transitions."""


@dataclass(frozen=True)
class QueueName:
    """Identifies one queue directory: a stage owned by a user or global.

    ``user=None`` means the global scope. Globals exist only for task
    stages; per-user queues exist for job stages plus task input/output.
    """

    user: str | None
    stage: str

    def __post_init__(self) -> None:
        if self.user is None:
            if self.stage not in GLOBAL_STAGES:
                raise QueueError(f"unknown queue: global/{self.stage}")
        else:
            if self.stage not in USER_STAGES:
                raise QueueError(f"unknown queue: {self.user}/{self.stage}")

    def path(self, root: Path | str) -> Path:
        root = Path(root)
        if self.user is None:
            return root / "global" / self.stage
        return root / "users" / self.user / self.stage

    @property
    def extension(self) -> str:
        return ".task" if self.stage.startswith("task") else ".job"

    def __str__(self) -> str:
        owner = self.user if self.user is not None else "global"
        return f"{owner}/{self.stage}"


def job_input(user: str) -> QueueName:
    return QueueName(user, "job-input")


def job_running(user: str) -> QueueName:
    return QueueName(user, "job-running")


def job_output(user: str) -> QueueName:
    return QueueName(user, "job-output")


def task_input(user: str) -> QueueName:
    return QueueName(user, "task-input")


def task_output(user: str) -> QueueName:
    return QueueName(user, "task-output")


def global_task_input() -> QueueName:
    return QueueName(None, "task-input")


def global_task_running() -> QueueName:
    return QueueName(None, "task-running")


def global_task_output() -> QueueName:
    return QueueName(None, "task-output")


@dataclass
class RecordFile:
    """One claimed or loaded queue record.

    ``id`` is the ticket (also the file stem) and stays stable across all
    stage transitions. ``payload`` may be mutated by the holder and written
    back via :func:`update` or :func:`release`.
    """

    id: str
    payload: dict
    queue: QueueName
    path: Path = field(repr=False)


# Ticket counter: zero-padded so lexicographic order equals creation order,
# seeded from the wall clock so independent processes still sort correctly.
_ticket_lock = threading.Lock()
_last_ticket_value = 0


def new_ticket() -> str:
    global _last_ticket_value
    with _ticket_lock:
        value = max(_last_ticket_value + 1, time.time_ns())
        _last_ticket_value = value
    return f"t-{value:020d}-{os.urandom(3).hex()}"


def _dump_payload(payload: dict) -> bytes:
    # Canonical form so identical payloads always produce identical bytes.
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _load_payload(path: Path) -> dict:
    with open(path, "rb") as fh:
        return json.loads(fh.read().decode("utf-8"))


def _write_atomic(data: bytes, destination: Path, staging_dir: Path) -> None:
    """Write ``data`` to ``destination`` via fsync'd temp file + rename."""
    staging_dir.mkdir(parents=True, exist_ok=True)
    tmp = staging_dir / f".{destination.name}.{os.getpid()}.{os.urandom(4).hex()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, destination)
    finally:
        if tmp.exists():
            tmp.unlink(missing_ok=True)


def init_root(root: Path | str) -> Path:
    """Create the global queue directories and archive under ``root``."""
    root = Path(root)
    for stage in GLOBAL_STAGES:
        (root / "global" / stage).mkdir(parents=True, exist_ok=True)
    (root / "archive" / "tasks").mkdir(parents=True, exist_ok=True)
    (root / "archive" / "orphan-tasks").mkdir(parents=True, exist_ok=True)
    (root / ".staging").mkdir(exist_ok=True)
    return root


def ensure_user(root: Path | str, user: str) -> None:
    """Create the per-user queue directories and data directory."""
    base = Path(root) / "users" / user
    for stage in USER_STAGES:
        (base / stage).mkdir(parents=True, exist_ok=True)
    (base / "data").mkdir(exist_ok=True)


def list_users(root: Path | str) -> list[str]:
    users_dir = Path(root) / "users"
    if not users_dir.is_dir():
        return []
    return sorted(p.name for p in users_dir.iterdir() if p.is_dir())


def user_data_dir(root: Path | str, user: str) -> Path:
    return Path(root) / "users" / user / "data"


def _queue_dir(root: Path | str, queue: QueueName) -> Path:
    directory = queue.path(root)
    if not directory.is_dir():
        raise QueueError(f"unknown queue: {queue}")
    return directory


def list_tickets(root: Path | str, queue: QueueName) -> list[str]:
    """Tickets currently in ``queue``, oldest first."""
    directory = _queue_dir(root, queue)
    return sorted(p.stem for p in directory.iterdir() if p.suffix == queue.extension)


def enqueue(root: Path | str, payload: dict, queue: QueueName) -> str:
    """Durably add a new record to ``queue``; returns its ticket.

    The ticket is written as the file name, so FIFO order is simply the
    sorted directory listing.
    """
    directory = _queue_dir(root, queue)
    ticket = new_ticket()
    _write_atomic(_dump_payload(payload), directory / (ticket + queue.extension),
                  Path(root) / ".staging")
    return ticket


def load_record(root: Path | str, queue: QueueName, ticket: str) -> RecordFile:
    path = _queue_dir(root, queue) / (ticket + queue.extension)
    return RecordFile(id=ticket, payload=_load_payload(path), queue=queue, path=path)


def claim(root: Path | str, source: QueueName, destination: QueueName) -> RecordFile | None:
    """Atomically move the oldest record from ``source`` to ``destination``.

    Returns ``None`` when the source queue is empty. Safe under concurrent
    claimers: os.rename succeeds for exactly one of them, the losers just
    move on to the next candidate.
    """
    if source == destination:
        raise QueueError("claim requires distinct queues")
    src_dir = _queue_dir(root, source)
    dst_dir = _queue_dir(root, destination)
    for name in sorted(p.name for p in src_dir.iterdir() if p.suffix == source.extension):
        src = src_dir / name
        dst = dst_dir / name
        try:
            os.rename(src, dst)
        except FileNotFoundError:
            continue  # lost the race for this record
        # Stamp claim time so orphan sweeps measure age since claim, not
        # since enqueue (rename preserves mtime).
        os.utime(dst)
        return RecordFile(id=Path(name).stem, payload=_load_payload(dst),
                          queue=destination, path=dst)
    return None


def update(root: Path | str, record: RecordFile) -> None:
    """Atomically rewrite a held record's payload in place."""
    _write_atomic(_dump_payload(record.payload), record.path, Path(root) / ".staging")


def release(root: Path | str, record: RecordFile, destination: QueueName) -> None:
    """Persist payload mutations, then move the record to ``destination``.

    The payload is written back in place first, so if serialization fails
    the record stays where it is for a later recovery sweep; only then is
    the file renamed, keeping the id in exactly one directory at all times.
    """
    update(root, record)
    dst = _queue_dir(root, destination) / (record.id + destination.extension)
    try:
        os.rename(record.path, dst)
    except FileNotFoundError:
        # Record was swept away from under us (e.g. presumed orphaned while
        # this process stalled). Someone else owns it now; drop our copy.
        raise QueueError(f"record {record.id} no longer held in {record.queue}")
    record.queue = destination
    record.path = dst


def move_record(root: Path | str, source: QueueName, destination: QueueName, ticket: str) -> RecordFile:
    """Atomically move one specific record between queues."""
    src = _queue_dir(root, source) / (ticket + source.extension)
    dst = _queue_dir(root, destination) / (ticket + destination.extension)
    try:
        os.rename(src, dst)
    except FileNotFoundError:
        raise QueueError(f"record {ticket} not found in {source}")
    os.utime(dst)
    return RecordFile(id=ticket, payload=_load_payload(dst), queue=destination, path=dst)


def archive_record(root: Path | str, record: RecordFile, *, bucket: str = "tasks") -> Path:
    """Move a finished record out of the queue system into the archive."""
    update(root, record)
    dst = Path(root) / "archive" / bucket / record.path.name
    dst.parent.mkdir(parents=True, exist_ok=True)
    os.rename(record.path, dst)
    record.path = dst
    return dst


def list_archive(root: Path | str, *, bucket: str = "tasks") -> list[RecordFile]:
    directory = Path(root) / "archive" / bucket
    if not directory.is_dir():
        return []
    records = []
    for path in sorted(directory.iterdir()):
        records.append(RecordFile(id=path.stem, payload=_load_payload(path),
                                  queue=global_task_output(), path=path))
    return records


def sweep_orphans(root: Path | str, running: QueueName, back_to: QueueName,
                  timeout_s: float = DEFAULT_ORPHAN_TIMEOUT_S) -> list[str]:
    """Return records stuck in a running queue to an input queue.

    A record whose claim stamp (mtime) is older than ``timeout_s`` is
    presumed abandoned by a dead process. Re-execution is safe because
    matching is pure; the system is at-least-once after a crash.
    """
    run_dir = _queue_dir(root, running)
    dst_dir = _queue_dir(root, back_to)
    cutoff = time.time() - timeout_s
    swept = []
    for path in sorted(run_dir.iterdir()):
        if path.suffix != running.extension:
            continue
        try:
            if path.stat().st_mtime > cutoff:
                continue
            os.rename(path, dst_dir / path.name)
        except FileNotFoundError:
            continue
        swept.append(path.stem)
    return swept


def all_queue_tickets(root: Path | str) -> dict[str, list[str]]:
    """Snapshot of every queue directory's tickets, keyed by queue string.

    Listing order is terminal stages first so that a concurrent forward
    transition can never make one record appear in two snapshots.
    """
    root = Path(root)
    snapshot: dict[str, list[str]] = {}
    order = ["task-output", "task-running", "task-input"]
    for stage in order:
        q = QueueName(None, stage)
        snapshot[str(q)] = list_tickets(root, q)
    for user in list_users(root):
        for stage in ["job-output", "task-output", "job-running", "task-input", "job-input"]:
            q = QueueName(user, stage)
            snapshot[str(q)] = list_tickets(root, q)
    return snapshot
