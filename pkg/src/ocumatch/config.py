"""Deployment configuration file (JSON, one document, optional sections).

::

    {
      "scheduler": {"policy": "fair", "core_budget": 4, "poll_ms": 1000},
      "job_manager": {"threshold_px": 60, "poll_ms": 200},
      "gateway": {"host": "127.0.0.1", "port": 8420, "token_file": "tokens.json"}
    }

Validation happens here, at load time: a bad policy name never reaches a
running scheduler.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .jobs import DEFAULT_RADIUS_THRESHOLD_PX
from .scheduler import POLICIES, SchedulerConfigError


class ConfigError(Exception):
    pass


@dataclass
class SchedulerConfig:
    policy: str = "fair"
    core_budget: int = 4
    poll_ms: int = 1000


@dataclass
class JobManagerConfig:
    threshold_px: float = DEFAULT_RADIUS_THRESHOLD_PX
    poll_ms: int = 200


@dataclass
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 8420
    token_file: str = "tokens.json"


@dataclass
class ServiceConfig:
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    job_manager: JobManagerConfig = field(default_factory=JobManagerConfig)
    gateway: GatewayConfig = field(default_factory=GatewayConfig)


def load_config(path: Path | str | None) -> ServiceConfig:
    if path is None:
        return ServiceConfig()
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    config = ServiceConfig(
        scheduler=SchedulerConfig(**doc.get("scheduler", {})),
        job_manager=JobManagerConfig(**doc.get("job_manager", {})),
        gateway=GatewayConfig(**doc.get("gateway", {})),
    )
    if config.scheduler.policy not in POLICIES:
        raise SchedulerConfigError(
            f"unknown scheduling policy: {config.scheduler.policy!r}")
    if config.scheduler.core_budget < 1:
        raise ConfigError("scheduler.core_budget must be at least 1")
    return config
