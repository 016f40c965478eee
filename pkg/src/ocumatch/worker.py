"""Generic worker: claims tasks, runs matcher executables, releases results.

Workers are entirely stateless; any number may run concurrently on hosts
that share the queue filesystem. Safety comes from the atomic claim in
:mod:`ocumatch.queues`, and a misbehaving plugin can never wedge the loop:
every fault becomes an error outcome on the task, which is released like
any other result.
"""

from __future__ import annotations

import os
import re
import shutil
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import queues, registry
from .queues import QueueError, RecordFile

DEFAULT_POLL_S = 0.5

# Plugin contract: final stdout line is a dissimilarity in [0, 1].
SCORE_RE = re.compile(r"^(0(\.[0-9]+)?|1(\.0+)?)$")


class PluginError(Exception):
    """A plugin execution fault; str(exc) is the task's error outcome."""


@dataclass
class TaskRecord:
    task_id: str
    user: str
    job_id: str
    image_a: str
    image_b: str
    algorithm: str
    radii: tuple[float, float] | None = None
    outcome: dict | None = None
    timings: dict = field(default_factory=dict)

    def to_payload(self) -> dict:
        return {
            "kind": "task",
            "user": self.user,
            "job_id": self.job_id,
            "image_a": self.image_a,
            "image_b": self.image_b,
            "algorithm": self.algorithm,
            "radii": list(self.radii) if self.radii is not None else None,
            "outcome": self.outcome,
            "timings": self.timings,
        }

    @classmethod
    def from_record(cls, record: RecordFile) -> "TaskRecord":
        p = record.payload
        radii = p.get("radii")
        return cls(
            task_id=record.id,
            user=p["user"],
            job_id=p["job_id"],
            image_a=p["image_a"],
            image_b=p["image_b"],
            algorithm=p["algorithm"],
            radii=tuple(radii) if radii is not None else None,
            outcome=p.get("outcome"),
            timings=p.get("timings", {}),
        )


def _final_stdout_line(stdout: str) -> str:
    lines = [line.strip() for line in stdout.splitlines() if line.strip()]
    return lines[-1] if lines else ""


def parse_score(stdout: str) -> float:
    line = _final_stdout_line(stdout)
    if SCORE_RE.match(line):
        return float(line)
    try:
        value = float(line)
    except ValueError:
        raise PluginError("malformed score") from None
    if 0.0 <= value <= 1.0:
        # Parseable but violates the bit-exact output format.
        raise PluginError("malformed score")
    raise PluginError("score out of range")


def execute_plugin(descriptor: registry.AlgorithmDescriptor, image_a: str | Path,
                   image_b: str | Path, *, scratch_root: str | Path | None = None) -> float:
    """Run a matcher executable on two images and return its dissimilarity.

    The plugin gets a throwaway scratch directory as its working directory,
    so stray relative writes can never land in queue or registry state. The
    whole process group is killed on timeout.
    """
    scratch = tempfile.mkdtemp(prefix="ocumatch-plugin-",
                               dir=str(scratch_root) if scratch_root else None)
    try:
        proc = subprocess.Popen(
            [descriptor.entry_executable, str(image_a), str(image_b)],
            cwd=scratch,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            start_new_session=True,
        )
        try:
            stdout, _ = proc.communicate(timeout=descriptor.timeout_s)
        except subprocess.TimeoutExpired:
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            proc.wait()
            raise PluginError("plugin timeout") from None
        if proc.returncode != 0:
            raise PluginError(f"plugin failed (code {proc.returncode})")
        return parse_score(stdout)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def process_one_task(root: Path | str, *, scratch_root: str | Path | None = None) -> bool:
    """Claim and fully process a single task; False when the queue is empty."""
    record = queues.claim(root, queues.global_task_input(), queues.global_task_running())
    if record is None:
        return False
    record.payload.setdefault("timings", {})["claimed_at"] = time.time()
    try:
        descriptor = registry.get_algorithm(root, record.payload["algorithm"])
        score = execute_plugin(descriptor, record.payload["image_a"],
                               record.payload["image_b"], scratch_root=scratch_root)
        record.payload["outcome"] = {"dissimilarity": score}
    except (PluginError, registry.RegistryError) as exc:
        record.payload["outcome"] = {"error": str(exc)}
    record.payload["timings"]["executed_at"] = time.time()
    record.payload["timings"]["released_at"] = time.time()
    try:
        queues.release(root, record, queues.global_task_output())
    except QueueError:
        # Swept away as a presumed orphan while we stalled; the task will be
        # re-executed, which is safe because matching is pure.
        pass
    return True


def run_worker_loop(root: Path | str, worker_id: str = "worker", *,
                    poll_s: float = DEFAULT_POLL_S,
                    stop_event: threading.Event | None = None,
                    scratch_root: str | Path | None = None) -> None:
    """Service loop: claim, execute, release, idle politely when empty."""
    while stop_event is None or not stop_event.is_set():
        try:
            worked = process_one_task(root, scratch_root=scratch_root)
        except QueueError:
            worked = False  # queue tree mid-creation or racing claimers
        if not worked:
            if stop_event is not None:
                stop_event.wait(poll_s)
            else:
                time.sleep(poll_s)
