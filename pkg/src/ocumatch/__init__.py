"""Ocular biometric matching as a service.

A small orchestration platform: an HTTP gateway accepts image-pair matching
jobs, a job manager picks a matching algorithm (explicitly requested or
auto-selected from iris size), a fair scheduler shares worker cores between
users, and generic workers execute registered matcher executables. All
components communicate exclusively through file-backed queues, so any of
them can run in its own process and crash without corrupting state.

Submodules are imported lazily where they pull heavy dependencies; plugin
executables only ever touch :mod:`ocumatch.matching`.
"""

__version__ = "0.1.0"
