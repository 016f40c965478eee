"""In-process deployment: job manager, scheduler, and workers on threads.

Production runs each service as its own OS process (see the CLI), but
because every component talks only through the queue filesystem they run
just as correctly on threads inside one process. That is how the
integration tests and the selection experiment bring up a whole system;
plugin executions are real subprocesses either way.

Token defaults: ``tok-eval`` (user ``eval``) and ``tok-admin`` (admin).
"""

from __future__ import annotations

import threading
from pathlib import Path

from . import queues, registry
from .jobs import DEFAULT_RADIUS_THRESHOLD_PX, JobManager
from .scheduler import TaskScheduler
from .worker import run_worker_loop

DEFAULT_TOKENS = {
    "tok-eval": {"user": "eval", "role": "user"},
    "tok-admin": {"user": "admin", "role": "admin"},
}


class Deployment:
    def __init__(self, root: Path | str, *, core_budget: int = 4, workers: int = 4,
                 policy: str = "fair",
                 threshold_px: float = DEFAULT_RADIUS_THRESHOLD_PX,
                 poll_s: float = 0.05,
                 orphan_timeout_s: float = queues.DEFAULT_ORPHAN_TIMEOUT_S,
                 filterbank: str = "B",
                 tokens: dict | None = None):
        self.root = queues.init_root(root)
        if not registry.load_registry(self.root):
            registry.install_reference_algorithms(self.root, filterbank=filterbank)
        self.tokens = dict(tokens) if tokens is not None else dict(DEFAULT_TOKENS)
        self.core_budget = core_budget
        self.workers = workers
        self.policy = policy
        self.threshold_px = threshold_px
        self.poll_s = poll_s
        self.orphan_timeout_s = orphan_timeout_s
        self.stop_event = threading.Event()
        self._threads: list[threading.Thread] = []

    def gateway_app(self):
        from .gateway import create_app

        return create_app(self.root, self.tokens)

    def start(self) -> "Deployment":
        if self._threads:
            raise RuntimeError("deployment already started")
        manager = JobManager(self.root, threshold_px=self.threshold_px)
        scheduler = TaskScheduler(self.root, self.core_budget, policy=self.policy,
                                  orphan_timeout_s=self.orphan_timeout_s)
        scratch = self.root / ".scratch"
        scratch.mkdir(exist_ok=True)

        def spawn(name, target, **kwargs):
            thread = threading.Thread(target=target, name=name, kwargs=kwargs, daemon=True)
            thread.start()
            self._threads.append(thread)

        spawn("job-manager", manager.run_forever,
              poll_s=self.poll_s, stop_event=self.stop_event)
        spawn("scheduler", scheduler.run_forever,
              poll_s=self.poll_s, stop_event=self.stop_event)
        for i in range(self.workers):
            spawn(f"worker-{i}", run_worker_loop, root=self.root, worker_id=f"worker-{i}",
                  poll_s=self.poll_s, stop_event=self.stop_event, scratch_root=scratch)
        return self

    def stop(self) -> None:
        self.stop_event.set()
        for thread in self._threads:
            thread.join(timeout=30.0)
        self._threads = []

    def __enter__(self) -> "Deployment":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
