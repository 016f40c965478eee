"""The automatic-selection experiment.

Runs a complete deployment, pushes a batch of image pairs through the HTTP
gateway without naming an algorithm, waits for every job to finish, and
returns the resulting execution ledger. With pairs whose iris radii
straddle the selection threshold, the metered split of iris vs. ocular
executions (and the credit percentages derived from it) reproduces the
radius dichotomy exactly.
"""

from __future__ import annotations

import time
from pathlib import Path

from .. import ledger
from ..deployment import Deployment
from .roc import EvalError

USER_TOKEN = "tok-eval"


def selection_experiment(pairs: list[tuple[Path | str, Path | str]],
                         threshold_px: float, root: Path | str, *,
                         core_budget: int = 4, workers: int = 4,
                         timeout_s: float = 600.0,
                         poll_s: float = 0.05) -> ledger.LedgerTable:
    """Submit every pair for matching and return the final ledger.

    Raises :class:`EvalError` naming the stuck jobs if anything fails to
    reach a terminal state within ``timeout_s``.
    """
    from fastapi.testclient import TestClient

    deployment = Deployment(root, core_budget=core_budget, workers=workers,
                            threshold_px=threshold_px, poll_s=poll_s)
    headers = {"Authorization": f"Bearer {USER_TOKEN}"}
    with deployment, TestClient(deployment.gateway_app()) as client:
        job_ids = []
        for path_a, path_b in pairs:
            response = client.post(
                "/jobs",
                files={
                    "image_a": ("a.pgm", Path(path_a).read_bytes()),
                    "image_b": ("b.pgm", Path(path_b).read_bytes()),
                },
                headers=headers,
            )
            response.raise_for_status()
            job_ids.append(response.json()["job_id"])

        outstanding = set(job_ids)
        deadline = time.monotonic() + timeout_s
        while outstanding and time.monotonic() < deadline:
            for job_id in sorted(outstanding):
                detail = client.get(f"/jobs/{job_id}", headers=headers)
                detail.raise_for_status()
                if detail.json()["status"] in ("done", "failed"):
                    outstanding.discard(job_id)
            if outstanding:
                time.sleep(poll_s)
        if outstanding:
            raise EvalError(f"jobs stuck after {timeout_s:.0f}s: {sorted(outstanding)}")
    return ledger.load(root)
