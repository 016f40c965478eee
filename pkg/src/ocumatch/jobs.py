"""Job manager: preprocessing, algorithm selection, metering, finalization.

Exactly one job-manager process runs per deployment; it is the single
writer for job queues and the ledger. Each tick it (a) folds finished
tasks back into their jobs and (b) turns new jobs into tasks, picking the
matching algorithm when the user did not.

Auto-selection measures the iris radius in both images: if the smaller
radius falls below the configured pixel threshold there is not enough iris
detail, so a general ocular matcher is used; otherwise an iris matcher.
The estimated radii travel with the task so every selection is auditable.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import ledger, queues, registry
from .queues import RecordFile
from .worker import TaskRecord

logger = logging.getLogger(__name__)

DEFAULT_RADIUS_THRESHOLD_PX = 60.0


class JobError(Exception):
    """Preprocessing rejection; str(exc) becomes the job's error message."""


@dataclass
class MatchScore:
    dissimilarity: float
    algorithm: str
    decision_threshold_hint: float | None = None

    def to_payload(self) -> dict:
        return {
            "dissimilarity": self.dissimilarity,
            "algorithm": self.algorithm,
            "decision_threshold_hint": self.decision_threshold_hint,
        }


def new_job_payload(user: str, image_a: str, image_b: str,
                    requested_algorithm: str | None = None) -> dict:
    return {
        "kind": "job",
        "user": user,
        "image_a": image_a,
        "image_b": image_b,
        "requested_algorithm": requested_algorithm,
        "status": "pending",
        "score": None,
        "error": None,
        "submitted_at": time.time(),
        "completed_at": None,
        "selection": None,
        "task_id": None,
    }


def select_algorithm(radius_a: float, radius_b: float, threshold_px: float,
                     algorithms: list[registry.AlgorithmDescriptor],
                     executions: dict[str, int] | None = None) -> str:
    """Pick a matcher id from the measured iris radii.

    Strictly below the threshold selects the ocular modality; at or above
    it, iris. Among several algorithms of the winning modality the one
    with the fewest lifetime executions wins (ties lexicographic), which
    spreads micropayments across developers.
    """
    if radius_a <= 0 or radius_b <= 0:
        raise JobError("radii must be positive")
    modality = "ocular" if min(radius_a, radius_b) < threshold_px else "iris"
    candidates = [d for d in algorithms if d.modality == modality]
    if not candidates:
        raise JobError("no candidate algorithm")
    executions = executions or {}
    chosen = min(candidates, key=lambda d: (executions.get(d.algorithm_id, 0), d.algorithm_id))
    return chosen.algorithm_id


class JobManager:
    """Single-writer event loop over job queues, tasks, and the ledger."""

    def __init__(self, root: Path | str, *,
                 threshold_px: float = DEFAULT_RADIUS_THRESHOLD_PX):
        self.root = Path(root)
        self.threshold_px = threshold_px

    # -- preprocessing ---------------------------------------------------

    def _resolve_algorithm(self, payload: dict,
                           algorithms: list[registry.AlgorithmDescriptor]
                           ) -> tuple[str, dict]:
        """Returns (algorithm_id, selection audit document)."""
        requested = payload.get("requested_algorithm")
        if requested is not None:
            # Explicit choice: registry check only, no radius estimation.
            if not any(d.algorithm_id == requested for d in algorithms):
                raise JobError("unknown algorithm")
            return requested, {"auto": False}

        from .matching import ImageFormatError, SegmentationError, estimate_geometry, load_gray

        radii = []
        for key in ("image_a", "image_b"):
            try:
                image = load_gray(payload[key])
            except ImageFormatError:
                raise JobError("bad input image") from None
            try:
                radii.append(estimate_geometry(image).iris_radius)
            except SegmentationError as exc:
                raise JobError(str(exc)) from None
        counts = ledger.load(self.root).executions()
        algorithm_id = select_algorithm(radii[0], radii[1], self.threshold_px,
                                        algorithms, counts)
        return algorithm_id, {
            "auto": True,
            "radius_a": radii[0],
            "radius_b": radii[1],
            "threshold_px": self.threshold_px,
        }

    def preprocess_job(self, record: RecordFile,
                       algorithms: list[registry.AlgorithmDescriptor]) -> None:
        """Turn one claimed job (already in job-running) into a task.

        On rejection the job goes straight to job-output as failed; no task
        is emitted and nothing is metered.
        """
        payload = record.payload
        user = payload["user"]
        try:
            algorithm_id, selection = self._resolve_algorithm(payload, algorithms)
        except JobError as exc:
            self._fail_job(record, str(exc))
            return

        # Meter at selection time: the paper's placement, so a developer is
        # credited even if the plugin later fails on this input.
        table = ledger.load(self.root)
        ledger.record_execution(table, algorithm_id)
        ledger.save(self.root, table)

        task = TaskRecord(
            task_id="",  # assigned by enqueue
            user=user,
            job_id=record.id,
            image_a=payload["image_a"],
            image_b=payload["image_b"],
            algorithm=algorithm_id,
            radii=(selection["radius_a"], selection["radius_b"]) if selection.get("auto") else None,
            timings={"created_at": time.time()},
        )
        ticket = queues.enqueue(self.root, task.to_payload(), queues.task_input(user))
        payload["status"] = "running"
        payload["selection"] = selection
        payload["task_id"] = ticket
        queues.update(self.root, record)

    def _fail_job(self, record: RecordFile, message: str) -> None:
        payload = record.payload
        payload["status"] = "failed"
        payload["error"] = message
        payload["completed_at"] = max(time.time(), payload.get("submitted_at") or 0.0)
        queues.release(self.root, record, queues.job_output(payload["user"]))

    # -- finalization ------------------------------------------------------

    def finalize_job(self, task: TaskRecord) -> dict | None:
        """Fold a finished task's outcome into its job record.

        Returns the final job payload, or None for an orphan task whose job
        no longer exists (archived separately, never fatal).
        """
        user = task.user
        running_path = queues.job_running(user).path(self.root) / f"{task.job_id}.job"
        if not running_path.is_file():
            done_path = queues.job_output(user).path(self.root) / f"{task.job_id}.job"
            if done_path.is_file():
                return None  # already finalized in a previous life
            logger.warning("orphan task %s: no job %s for user %s",
                           task.task_id, task.job_id, user)
            return None
        record = queues.load_record(self.root, queues.job_running(user), task.job_id)
        payload = record.payload
        outcome = task.outcome or {"error": "task finished without outcome"}
        if "dissimilarity" in outcome:
            hint = None
            try:
                hint = registry.get_algorithm(self.root, task.algorithm).decision_threshold_hint
            except registry.RegistryError:
                pass
            payload["status"] = "done"
            payload["score"] = MatchScore(outcome["dissimilarity"], task.algorithm, hint).to_payload()
        else:
            payload["status"] = "failed"
            payload["error"] = outcome.get("error", "unknown failure")
        payload["completed_at"] = max(time.time(), payload.get("submitted_at") or 0.0)
        queues.release(self.root, record, queues.job_output(user))
        return payload

    # -- event loop --------------------------------------------------------

    def _drain_task_outputs(self, user: str) -> int:
        progressed = 0
        for ticket in queues.list_tickets(self.root, queues.task_output(user)):
            record = queues.load_record(self.root, queues.task_output(user), ticket)
            task = TaskRecord.from_record(record)
            orphan = self.finalize_job(task) is None and not (
                queues.job_output(user).path(self.root) / f"{task.job_id}.job").is_file()
            queues.archive_record(self.root, record,
                                  bucket="orphan-tasks" if orphan else "tasks")
            progressed += 1
        return progressed

    def _preprocess_inputs(self, user: str,
                           algorithms: list[registry.AlgorithmDescriptor]) -> int:
        progressed = 0
        while True:
            record = queues.claim(self.root, queues.job_input(user), queues.job_running(user))
            if record is None:
                return progressed
            self.preprocess_job(record, algorithms)
            progressed += 1

    def recover(self) -> int:
        """Startup sweep: jobs stuck in job-running without an emitted task
        were interrupted mid-preprocess; send them back to job-input."""
        recovered = 0
        for user in queues.list_users(self.root):
            for ticket in queues.list_tickets(self.root, queues.job_running(user)):
                record = queues.load_record(self.root, queues.job_running(user), ticket)
                if record.payload.get("task_id") is None:
                    queues.move_record(self.root, queues.job_running(user),
                                       queues.job_input(user), ticket)
                    recovered += 1
        return recovered

    def run_once(self) -> int:
        algorithms = registry.load_registry(self.root)
        progressed = 0
        for user in queues.list_users(self.root):
            progressed += self._drain_task_outputs(user)
            progressed += self._preprocess_inputs(user, algorithms)
        return progressed

    def run_forever(self, *, poll_s: float = 0.2,
                    stop_event: threading.Event | None = None) -> None:
        self.recover()
        while stop_event is None or not stop_event.is_set():
            if self.run_once() == 0:
                if stop_event is not None:
                    stop_event.wait(poll_s)
                else:
                    time.sleep(poll_s)
