"""Registry of developer-submitted matching algorithms.

Each algorithm is one JSON descriptor at ``<root>/registry/<id>.alg``. The
entry executable must accept two image paths on the command line and print
a dissimilarity in [0, 1] as the final line of stdout (see
:mod:`ocumatch.worker` for the full contract).
"""

from __future__ import annotations

import json
import os
import stat
import sys
from dataclasses import dataclass, asdict
from pathlib import Path

MODALITIES = ("iris", "ocular")
DEFAULT_PLUGIN_TIMEOUT_S = 60.0


class RegistryError(Exception):
    pass


@dataclass(frozen=True)
class AlgorithmDescriptor:
    algorithm_id: str
    developer_id: str
    modality: str  # "iris" or "ocular"
    entry_executable: str
    timeout_s: float = DEFAULT_PLUGIN_TIMEOUT_S
    description: str = ""
    decision_threshold_hint: float | None = None

    def __post_init__(self) -> None:
        if self.modality not in MODALITIES:
            raise RegistryError(f"unknown modality: {self.modality!r}")


def registry_dir(root: Path | str) -> Path:
    return Path(root) / "registry"


def register(root: Path | str, descriptor: AlgorithmDescriptor) -> Path:
    """Validate and persist a descriptor; also creates its ledger row."""
    entry = Path(descriptor.entry_executable)
    if not entry.is_file():
        raise RegistryError(f"entry executable not found: {entry}")
    if not os.access(entry, os.X_OK):
        raise RegistryError(f"entry executable not executable: {entry}")
    directory = registry_dir(root)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{descriptor.algorithm_id}.alg"
    if path.exists():
        raise RegistryError(f"algorithm already registered: {descriptor.algorithm_id}")
    path.write_text(json.dumps(asdict(descriptor), sort_keys=True, indent=2))

    from . import ledger  # local import: ledger also imports nothing heavy

    ledger.ensure_row(root, descriptor)
    return path


def load_registry(root: Path | str) -> list[AlgorithmDescriptor]:
    directory = registry_dir(root)
    if not directory.is_dir():
        return []
    descriptors = []
    for path in sorted(directory.glob("*.alg")):
        descriptors.append(AlgorithmDescriptor(**json.loads(path.read_text())))
    return descriptors


def get_algorithm(root: Path | str, algorithm_id: str) -> AlgorithmDescriptor:
    path = registry_dir(root) / f"{algorithm_id}.alg"
    if not path.is_file():
        raise RegistryError(f"unknown algorithm: {algorithm_id}")
    return AlgorithmDescriptor(**json.loads(path.read_text()))


def _write_wrapper(path: Path, module: str, env: dict[str, str] | None = None) -> Path:
    """Write a tiny shell wrapper that runs a plugin module with this Python.

    Registered entry executables must be directly executable files; using a
    wrapper keeps that true no matter how the package itself was installed.
    """
    lines = ["#!/bin/sh"]
    for key, value in (env or {}).items():
        lines.append(f'{key}="{value}"; export {key}')
    lines.append(f'exec "{sys.executable}" -m {module} "$@"')
    path.write_text("\n".join(lines) + "\n")
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return path


def install_reference_algorithms(root: Path | str, *, filterbank: str = "B",
                                 timeout_s: float = DEFAULT_PLUGIN_TIMEOUT_S) -> list[AlgorithmDescriptor]:
    """Register the two bundled matchers: a Gabor iris coder and an LBP
    periocular matcher. Used by ``ocumatch init`` and the test deployments.
    """
    bin_dir = registry_dir(root) / "bin"
    bin_dir.mkdir(parents=True, exist_ok=True)
    iris_exe = _write_wrapper(bin_dir / "gabor-iris", "ocumatch.plugins.iris_plugin",
                              env={"OCUMATCH_FILTERBANK": filterbank})
    peri_exe = _write_wrapper(bin_dir / "periocular-lbp", "ocumatch.plugins.periocular_plugin")
    descriptors = [
        AlgorithmDescriptor(
            algorithm_id="gabor-iris",
            developer_id="iris-works",
            modality="iris",
            entry_executable=str(iris_exe),
            timeout_s=timeout_s,
            description=f"Rubber-sheet normalization + quadrature Gabor iris code "
                        f"(filterbank {filterbank}), normalized Hamming distance",
            decision_threshold_hint=0.38,
        ),
        AlgorithmDescriptor(
            algorithm_id="periocular-lbp",
            developer_id="texture-labs",
            modality="ocular",
            entry_executable=str(peri_exe),
            timeout_s=timeout_s,
            description="Blockwise local-binary-pattern histograms, half-L1 distance",
            decision_threshold_hint=0.35,
        ),
    ]
    for descriptor in descriptors:
        register(root, descriptor)
    return descriptors
