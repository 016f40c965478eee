"""Task scheduling: promotes user tasks into the global queue.

The scheduler is the only mover between per-user task-input queues and the
global task-input queue, and it routes finished tasks from the global
output queue back to their user. A task counts against the core budget
from the moment it is promoted until its result is routed back, which
guarantees the global running queue can never exceed the number of worker
cores.

The default policy is max-min fair: free cores are granted one at a time
to the user currently holding the fewest, so whenever everyone is
backlogged the allocation differs by at most one core between any two
users. Remainder cores and ties go to the least recently served user. A
plain FIFO policy (globally oldest ticket wins) can be selected instead.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import queues
from .queues import QueueError

POLICIES = ("fair", "fifo")
DEFAULT_POLL_S = 1.0


class SchedulerConfigError(Exception):
    pass


class ConsistencyFault(Exception):
    """Internal counters disagree with the queue directories."""


@dataclass
class SchedulerState:
    core_budget: int
    running_per_user: dict[str, int] = field(default_factory=dict)
    pending_tickets: dict[str, list[str]] = field(default_factory=dict)
    service_clock: dict[str, int] = field(default_factory=dict)
    seq: int = 0
    policy: str = "fair"

    @property
    def pending_per_user(self) -> dict[str, int]:
        return {user: len(tickets) for user, tickets in self.pending_tickets.items()}

    @property
    def total_running(self) -> int:
        return sum(self.running_per_user.values())

    def set_policy(self, policy: str) -> None:
        if policy not in POLICIES:
            raise SchedulerConfigError(f"unknown scheduling policy: {policy!r}")
        self.policy = policy

    def on_task_complete(self, user: str) -> None:
        count = self.running_per_user.get(user, 0)
        if count < 1:
            raise ConsistencyFault(f"completion for user {user!r} with no running tasks")
        self.running_per_user[user] = count - 1

    def _grant(self, user: str, promotions: list[tuple[str, str]]) -> None:
        ticket = self.pending_tickets[user].pop(0)
        self.running_per_user[user] = self.running_per_user.get(user, 0) + 1
        self.seq += 1
        self.service_clock[user] = self.seq
        promotions.append((user, ticket))

    def _round_fair(self) -> list[tuple[str, str]]:
        promotions: list[tuple[str, str]] = []
        free = self.core_budget - self.total_running
        while free > 0:
            backlogged = [u for u, tickets in self.pending_tickets.items() if tickets]
            if not backlogged:
                break
            # Fewest cores first; break ties toward the least recently
            # served, then lexicographically for determinism.
            user = min(backlogged, key=lambda u: (self.running_per_user.get(u, 0),
                                                  self.service_clock.get(u, 0), u))
            self._grant(user, promotions)
            free -= 1
        return promotions

    def _round_fifo(self) -> list[tuple[str, str]]:
        promotions: list[tuple[str, str]] = []
        free = self.core_budget - self.total_running
        while free > 0:
            oldest = min(((tickets[0], u) for u, tickets in self.pending_tickets.items() if tickets),
                         default=None)
            if oldest is None:
                break
            self._grant(oldest[1], promotions)
            free -= 1
        return promotions

    def schedule_round(self) -> list[tuple[str, str]]:
        """Decide which pending tasks get a core; mutates the counters and
        returns (user, ticket) promotions oldest-ticket-first per user."""
        if self.policy == "fair":
            return self._round_fair()
        return self._round_fifo()


def schedule_round(state: SchedulerState) -> list[tuple[str, str]]:
    return state.schedule_round()


class TaskScheduler:
    """The IO wrapper that applies scheduling decisions to the queue tree."""

    def __init__(self, root: Path | str, core_budget: int, *, policy: str = "fair",
                 orphan_timeout_s: float = queues.DEFAULT_ORPHAN_TIMEOUT_S):
        if core_budget < 1:
            raise SchedulerConfigError("core_budget must be at least 1")
        if policy not in POLICIES:
            raise SchedulerConfigError(f"unknown scheduling policy: {policy!r}")
        self.root = Path(root)
        self.orphan_timeout_s = orphan_timeout_s
        self.state = self.rebuild_state(core_budget, policy)

    def rebuild_state(self, core_budget: int | None = None,
                      policy: str | None = None) -> SchedulerState:
        """Ground truth from a directory scan; used at startup and after any
        consistency fault. A task is 'running' for budget purposes from
        promotion (global input) through execution (global running)."""
        if core_budget is None:
            core_budget = self.state.core_budget
        if policy is None:
            policy = self.state.policy
        state = SchedulerState(core_budget=core_budget, policy=policy)
        for gq in (queues.global_task_input(), queues.global_task_running()):
            for ticket in queues.list_tickets(self.root, gq):
                try:
                    user = queues.load_record(self.root, gq, ticket).payload["user"]
                except (QueueError, FileNotFoundError, KeyError):
                    continue  # moved mid-scan; the next rebuild will see it
                state.running_per_user[user] = state.running_per_user.get(user, 0) + 1
        for user in queues.list_users(self.root):
            state.pending_tickets[user] = queues.list_tickets(self.root, queues.task_input(user))
        self.state = state
        return state

    def _route_completions(self) -> int:
        routed = 0
        gq = queues.global_task_output()
        for ticket in queues.list_tickets(self.root, gq):
            try:
                record = queues.load_record(self.root, gq, ticket)
            except FileNotFoundError:
                continue
            user = record.payload.get("user")
            try:
                queues.move_record(self.root, gq, queues.task_output(user), ticket)
            except QueueError:
                continue
            try:
                self.state.on_task_complete(user)
            except ConsistencyFault:
                self.rebuild_state()
            routed += 1
        return routed

    def run_once(self) -> list[tuple[str, str]]:
        self._route_completions()
        queues.sweep_orphans(self.root, queues.global_task_running(),
                             queues.global_task_input(), self.orphan_timeout_s)
        for user in queues.list_users(self.root):
            self.state.pending_tickets[user] = queues.list_tickets(
                self.root, queues.task_input(user))
        promotions = self.state.schedule_round()
        for user, ticket in promotions:
            try:
                queues.move_record(self.root, queues.task_input(user),
                                   queues.global_task_input(), ticket)
            except QueueError:
                self.rebuild_state()
        return promotions

    def run_forever(self, *, poll_s: float = DEFAULT_POLL_S,
                    stop_event: threading.Event | None = None) -> None:
        while stop_event is None or not stop_event.is_set():
            progressed = len(self.run_once()) > 0
            if not progressed:
                if stop_event is not None:
                    stop_event.wait(poll_s)
                else:
                    time.sleep(poll_s)
