"""Command line: service launchers, the API client, and the eval harness.

Service processes (one each of ``serve``, ``job-manager``, ``scheduler``,
any number of ``worker``) share a queue root directory. The client
subcommands talk to a running gateway and exit nonzero on any API error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Ocular matching service."""


# -- deployment ---------------------------------------------------------------

@main.command()
@click.option("--root", type=click.Path(path_type=Path), required=True)
@click.option("--filterbank", type=click.Choice(["A", "B", "C"]), default="B",
              show_default=True, help="Gabor parameter set for the iris matcher.")
@click.option("--user", "users", multiple=True, default=["alice"],
              show_default=True, help="User(s) to provision with a token.")
def init(root: Path, filterbank: str, users: tuple[str, ...]) -> None:
    """Create a queue root, register the reference matchers, write tokens."""
    from . import queues, registry

    queues.init_root(root)
    if not registry.load_registry(root):
        registry.install_reference_algorithms(root, filterbank=filterbank)
    tokens = {f"tok-{user}": {"user": user, "role": "user"} for user in users}
    tokens["tok-admin"] = {"user": "admin", "role": "admin"}
    for user in users:
        queues.ensure_user(root, user)
    token_file = root / "tokens.json"
    token_file.write_text(json.dumps({"tokens": tokens}, indent=2))
    click.echo(f"initialized {root} (tokens in {token_file})")


@main.command()
@click.option("--root", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8420, show_default=True)
@click.option("--tokens", type=click.Path(path_type=Path), default=None,
              help="Token file [default: <root>/tokens.json].")
def serve(root: Path, host: str, port: int, tokens: Path | None) -> None:
    """Run the HTTP gateway."""
    import uvicorn

    from .gateway import create_app

    app = create_app(root, tokens or root / "tokens.json")
    uvicorn.run(app, host=host, port=port)


@main.command("job-manager")
@click.option("--root", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--threshold-px", type=float, default=None,
              help="Iris radius below which the ocular matcher is selected.")
def job_manager_cmd(root: Path, config_path: Path | None, threshold_px: float | None) -> None:
    """Run the job manager loop (exactly one per deployment)."""
    from .config import load_config
    from .jobs import JobManager

    cfg = load_config(config_path).job_manager
    manager = JobManager(root, threshold_px=threshold_px if threshold_px is not None
                         else cfg.threshold_px)
    click.echo(f"job manager on {root} (threshold {manager.threshold_px}px)")
    manager.run_forever(poll_s=cfg.poll_ms / 1000.0)


@main.command("scheduler")
@click.option("--root", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--cores", type=int, default=None, help="Worker core budget.")
@click.option("--policy", type=str, default=None)
def scheduler_cmd(root: Path, config_path: Path | None, cores: int | None,
                  policy: str | None) -> None:
    """Run the task scheduler loop (exactly one per deployment)."""
    from .config import load_config
    from .scheduler import TaskScheduler

    cfg = load_config(config_path).scheduler
    sched = TaskScheduler(root, cores if cores is not None else cfg.core_budget,
                          policy=policy if policy is not None else cfg.policy)
    click.echo(f"scheduler on {root} ({sched.state.core_budget} cores, "
               f"{sched.state.policy})")
    sched.run_forever(poll_s=cfg.poll_ms / 1000.0)


@main.command("worker")
@click.option("--root", type=click.Path(path_type=Path, exists=True), required=True)
@click.option("--worker-id", default="worker", show_default=True)
@click.option("--poll-ms", type=int, default=500, show_default=True)
@click.option("--scratch", type=click.Path(path_type=Path), default=None)
def worker_cmd(root: Path, worker_id: str, poll_ms: int, scratch: Path | None) -> None:
    """Run one generic worker loop (start as many as you have cores)."""
    from .worker import run_worker_loop

    click.echo(f"worker {worker_id} on {root}")
    run_worker_loop(root, worker_id, poll_s=poll_ms / 1000.0, scratch_root=scratch)


# -- API client ---------------------------------------------------------------

def _client(api: str, token: str):
    import httpx

    return httpx.Client(base_url=api, headers={"Authorization": f"Bearer {token}"},
                        timeout=30.0)


def _fail_on_error(response) -> dict | list:
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        click.echo(f"error {response.status_code}: {detail}", err=True)
        sys.exit(1)
    return response.json()


api_option = click.option("--api", default="http://127.0.0.1:8420", show_default=True)
token_option = click.option("--token", envvar="OCUMATCH_TOKEN", required=True,
                            help="Bearer token [env: OCUMATCH_TOKEN].")


@main.command()
@api_option
@token_option
@click.argument("image_a", type=click.Path(exists=True, path_type=Path))
@click.argument("image_b", type=click.Path(exists=True, path_type=Path))
@click.option("--algorithm", default=None, help="Skip auto-selection.")
def submit(api: str, token: str, image_a: Path, image_b: Path,
           algorithm: str | None) -> None:
    """Submit a matching job; prints its id."""
    with _client(api, token) as client:
        data = {"algorithm": algorithm} if algorithm else {}
        response = client.post("/jobs", data=data, files={
            "image_a": (image_a.name, image_a.read_bytes()),
            "image_b": (image_b.name, image_b.read_bytes()),
        })
        doc = _fail_on_error(response)
    click.echo(doc["job_id"])


@main.command()
@api_option
@token_option
def history(api: str, token: str) -> None:
    """List your jobs, newest first."""
    with _client(api, token) as client:
        doc = _fail_on_error(client.get("/jobs"))
    click.echo(json.dumps(doc, indent=2))


@main.command()
@api_option
@token_option
@click.argument("job_id")
def show(api: str, token: str, job_id: str) -> None:
    """Show the full record of one job."""
    with _client(api, token) as client:
        doc = _fail_on_error(client.get(f"/jobs/{job_id}"))
    click.echo(json.dumps(doc, indent=2))


@main.command("ledger")
@api_option
@token_option
def ledger_cmd(api: str, token: str) -> None:
    """Show the execution/credit report (admin token required)."""
    with _client(api, token) as client:
        doc = _fail_on_error(client.get("/admin/ledger"))
    click.echo(json.dumps(doc, indent=2))


# -- evaluation ---------------------------------------------------------------

@main.group("eval")
def eval_group() -> None:
    """Matcher evaluation harness."""


@eval_group.command("pairs")
@click.option("--subjects", type=int, required=True)
@click.option("--images", type=int, required=True)
def eval_pairs(subjects: int, images: int) -> None:
    """Genuine/impostor comparison counts for a corpus shape."""
    from .evaluation import pair_counts

    genuine, impostor = pair_counts(subjects, images)
    click.echo(f"genuine={genuine} impostor={impostor}")


@eval_group.command("synthesize")
@click.option("--subjects", type=int, default=12, show_default=True)
@click.option("--images", type=int, default=12, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def eval_synthesize(subjects: int, images: int, seed: int, out: Path) -> None:
    """Generate a deterministic synthetic eye corpus."""
    from .evaluation import synthesize_corpus

    corpus = synthesize_corpus(subjects, images, seed, out)
    click.echo(f"wrote {len(corpus.samples)} images to {out}")


@eval_group.command("roc")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--matcher", required=True,
              help="One of the reference matchers, e.g. gabor-iris-b.")
@click.option("--out", type=click.Path(path_type=Path), required=True,
              help="Curve CSV (threshold,far,frr,gar).")
def eval_roc(corpus_dir: Path, matcher: str, out: Path) -> None:
    """Score all corpus pairs and write the ROC curve."""
    from .evaluation import eer, roc, score_all_pairs, write_curve_csv
    from .evaluation.corpus import load_corpus

    scores = score_all_pairs(load_corpus(corpus_dir), matcher)
    curve = roc(scores.genuine, scores.impostor)
    write_curve_csv(curve, out)
    click.echo(f"genuine={len(scores.genuine)} impostor={len(scores.impostor)} "
               f"exclusions={scores.exclusion_count} eer={eer(curve):.4f} -> {out}")


@eval_group.command("selection")
@click.option("--pairs", "manifest", type=click.Path(exists=True, path_type=Path),
              required=True, help='JSON list of {"image_a": ..., "image_b": ...}.')
@click.option("--threshold", "threshold_px", type=float, required=True)
@click.option("--root", type=click.Path(path_type=Path), default=None,
              help="Deployment root [default: temporary directory].")
@click.option("--workers", type=int, default=4, show_default=True)
def eval_selection(manifest: Path, threshold_px: float, root: Path | None,
                   workers: int) -> None:
    """Run the automatic-selection experiment end to end."""
    import tempfile

    from . import ledger
    from .evaluation import selection_experiment

    entries = json.loads(manifest.read_text())
    pairs = [(entry["image_a"], entry["image_b"]) for entry in entries]
    if root is None:
        root = Path(tempfile.mkdtemp(prefix="ocumatch-selection-"))
    table = selection_experiment(pairs, threshold_px, root,
                                 workers=workers, core_budget=workers)
    click.echo(json.dumps({"total": table.total, "rows": ledger.report(table)}, indent=2))


if __name__ == "__main__":
    main()
