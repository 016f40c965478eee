"""HTTP gateway: job submission, history, results, and the credit report.

Completion is asynchronous: POST /jobs returns a job id immediately and
clients poll GET /jobs/{id} until the status is terminal. The gateway only
ever writes to per-user data directories and job-input queues, so it can
run alongside the job manager without coordination.

Authentication is a static bearer-token file::

    {"tokens": {"tok-alice": {"user": "alice", "role": "user"},
                "tok-root":  {"user": "ops", "role": "admin",
                               "expires_at": 1924992000}}}
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import Depends, FastAPI, File, Form, Header, HTTPException, UploadFile

from . import jobs, ledger, queues, registry
from .matching.images import ImageFormatError, decode_gray, sniff_extension

MAX_IMAGE_BYTES = 10 * 1024 * 1024


@dataclass(frozen=True)
class ApiSession:
    user_id: str
    token: str
    role: str
    created_at: float


class TokenStore:
    def __init__(self, entries: dict[str, dict]):
        self.entries = entries

    @classmethod
    def from_file(cls, path: Path | str) -> "TokenStore":
        doc = json.loads(Path(path).read_text())
        return cls(doc.get("tokens", {}))

    def authenticate(self, token: str) -> ApiSession:
        entry = self.entries.get(token)
        if entry is None:
            raise HTTPException(status_code=401, detail="invalid token")
        expires_at = entry.get("expires_at")
        if expires_at is not None and time.time() > expires_at:
            raise HTTPException(status_code=401, detail="token expired")
        return ApiSession(user_id=entry["user"], token=token,
                          role=entry.get("role", "user"), created_at=time.time())


def _job_response(job_id: str, payload: dict, *, full: bool) -> dict:
    doc = {
        "job_id": job_id,
        "status": payload["status"],
        "requested_algorithm": payload.get("requested_algorithm"),
        "score": payload.get("score"),
        "error": payload.get("error"),
        "submitted_at": payload.get("submitted_at"),
        "completed_at": payload.get("completed_at"),
    }
    if full:
        doc["images"] = {"image_a": payload.get("image_a"), "image_b": payload.get("image_b")}
        doc["selection"] = payload.get("selection")
        doc["task_id"] = payload.get("task_id")
    return doc


def create_app(root: Path | str, tokens: TokenStore | dict | Path | str) -> FastAPI:
    root = Path(root)
    if isinstance(tokens, TokenStore):
        store = tokens
    elif isinstance(tokens, dict):
        store = TokenStore(tokens)
    else:
        store = TokenStore.from_file(tokens)

    app = FastAPI(title="ocumatch gateway")

    def session(authorization: str | None = Header(default=None)) -> ApiSession:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token",
                                headers={"WWW-Authenticate": "Bearer"})
        return store.authenticate(authorization.removeprefix("Bearer "))

    def _user_job_queues(user: str):
        return (queues.job_output(user), queues.job_running(user), queues.job_input(user))

    def _find_job(user: str, job_id: str) -> dict | None:
        for q in _user_job_queues(user):
            path = q.path(root) / f"{job_id}.job"
            if path.is_file():
                return queues.load_record(root, q, job_id).payload
        return None

    @app.post("/jobs", status_code=202)
    async def submit_job(image_a: UploadFile = File(...),
                         image_b: UploadFile = File(...),
                         algorithm: str | None = Form(default=None),
                         auth: ApiSession = Depends(session)) -> dict:
        uploads = []
        for upload in (image_a, image_b):
            data = await upload.read()
            if len(data) > MAX_IMAGE_BYTES:
                raise HTTPException(status_code=413, detail="image too large")
            try:
                decode_gray(data)
                uploads.append((data, sniff_extension(data)))
            except ImageFormatError:
                raise HTTPException(status_code=400, detail="bad input image") from None
        if algorithm is not None:
            try:
                registry.get_algorithm(root, algorithm)
            except registry.RegistryError:
                raise HTTPException(status_code=400, detail="unknown algorithm") from None

        queues.ensure_user(root, auth.user_id)
        data_dir = queues.user_data_dir(root, auth.user_id)
        stamp = queues.new_ticket()
        paths = []
        for label, (data, ext) in zip(("a", "b"), uploads):
            path = data_dir / f"{stamp}-{label}{ext}"
            path.write_bytes(data)
            paths.append(str(path))
        payload = jobs.new_job_payload(auth.user_id, paths[0], paths[1], algorithm)
        job_id = queues.enqueue(root, payload, queues.job_input(auth.user_id))
        return {"job_id": job_id, "status": "pending"}

    @app.get("/jobs")
    def job_history(auth: ApiSession = Depends(session)) -> list[dict]:
        records = []
        for q in _user_job_queues(auth.user_id):
            try:
                tickets = queues.list_tickets(root, q)
            except queues.QueueError:
                continue  # user has submitted nothing yet
            for ticket in tickets:
                payload = queues.load_record(root, q, ticket).payload
                records.append(_job_response(ticket, payload, full=False))
        records.sort(key=lambda doc: doc["submitted_at"] or 0.0, reverse=True)
        return records

    @app.get("/jobs/{job_id}")
    def job_detail(job_id: str, auth: ApiSession = Depends(session)) -> dict:
        payload = _find_job(auth.user_id, job_id)
        if payload is not None:
            return _job_response(job_id, payload, full=True)
        for user in queues.list_users(root):
            if user != auth.user_id and _find_job(user, job_id) is not None:
                raise HTTPException(status_code=403, detail="not your job")
        raise HTTPException(status_code=404, detail="unknown job")

    @app.get("/admin/ledger")
    def admin_ledger(auth: ApiSession = Depends(session)) -> dict:
        if auth.role != "admin":
            raise HTTPException(status_code=403, detail="admin only")
        table = ledger.load(root)
        return {"total": table.total, "unit_credit": table.unit_credit,
                "rows": ledger.report(table)}

    return app
