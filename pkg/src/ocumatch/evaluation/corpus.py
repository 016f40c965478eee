"""Deterministic synthetic eye corpus.

Real iris datasets are license-restricted, so evaluation runs on rendered
eyes: each identity is a band-limited angular texture painted into an
annulus between a dark pupil disk and a bright ground. Samples of one
identity vary by small in-plane rotation, additive noise, contrast jitter,
and iris scale, which is exactly the variation the matcher pipeline is
supposed to absorb.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..matching.images import write_pgm

# Texture grids are stored at this polar resolution and sampled bilinearly.
TEXTURE_GRID = (64, 512)
# Angular harmonic band: spans the passbands of all three filterbanks.
HARMONICS = (3, 32)
# Identity textures must correlate below this (rejection sampling).
MAX_IDENTITY_CORRELATION = 0.2

PUPIL_LEVEL = 40.0
IRIS_LEVEL = 130.0
SCLERA_LEVEL = 220.0
# With 2-sigma texture clipping the annulus stays within [60, 200]: always
# separable from the pupil below and the sclera above.
TEXTURE_AMPLITUDE = 35.0


@dataclass(frozen=True)
class Corpus:
    subjects: int
    images_per_subject: int
    samples: dict[tuple[int, int], Path]

    def path(self, subject: int, index: int) -> Path:
        return self.samples[(subject, index)]

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self.samples)


def generate_identity_texture(rng: np.random.Generator,
                              grid: tuple[int, int] = TEXTURE_GRID) -> np.ndarray:
    """Zero-mean, unit-RMS polar texture: random angular harmonics whose
    coefficients drift linearly across the radial extent.

    Tails are clipped at two sigma so that no texture valley can get dark
    enough to be mistaken for the pupil disk.
    """
    rows, cols = grid
    t = np.linspace(0.0, 1.0, rows)[:, None]
    phi = 2.0 * np.pi * np.arange(cols)[None, :] / cols
    texture = np.zeros(grid)
    for k in range(HARMONICS[0], HARMONICS[1] + 1):
        a0, a1, b0, b1 = rng.normal(size=4) / np.sqrt(k)
        texture += ((a0 * (1 - t) + a1 * t) * np.cos(k * phi)
                    + (b0 * (1 - t) + b1 * t) * np.sin(k * phi))
    texture -= texture.mean()
    texture /= np.sqrt((texture ** 2).mean())
    texture = np.clip(texture, -2.0, 2.0)
    return texture - texture.mean()


def _sample_texture(texture: np.ndarray, t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Bilinear lookup at radial fraction t in [0,1], angle phi (radians);
    wraps in angle, clamps in radius."""
    rows, cols = texture.shape
    r = np.clip(t, 0.0, 1.0) * (rows - 1)
    c = (phi % (2.0 * np.pi)) / (2.0 * np.pi) * cols
    r0 = np.floor(r).astype(np.intp)
    r1 = np.minimum(r0 + 1, rows - 1)
    c0 = np.floor(c).astype(np.intp) % cols
    c1 = (c0 + 1) % cols
    fr = r - r0
    fc = c - np.floor(c)
    return (texture[r0, c0] * (1 - fr) * (1 - fc) + texture[r0, c1] * (1 - fr) * fc
            + texture[r1, c0] * fr * (1 - fc) + texture[r1, c1] * fr * fc)


def render_eye(texture: np.ndarray, *, size: int = 256,
               center: tuple[float, float] | None = None,
               pupil_radius: float = 34.0, iris_radius: float = 85.0,
               rotation: float = 0.0, amplitude: float = TEXTURE_AMPLITUDE,
               noise_sigma: float = 0.0, contrast: float = 1.0,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """Paint a synthetic eye: dark pupil disk, textured iris annulus,
    bright ground. ``rotation`` is the in-plane texture rotation in
    radians (one corpus column is 2*pi/128)."""
    cx, cy = center if center is not None else (size / 2.0, size / 2.0)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    dist = np.hypot(xs - cx, ys - cy)
    phi = np.arctan2(ys - cy, xs - cx)

    img = np.full((size, size), SCLERA_LEVEL)
    img[dist <= iris_radius] = IRIS_LEVEL
    ring = (dist > pupil_radius) & (dist <= iris_radius)
    t = (dist[ring] - pupil_radius) / (iris_radius - pupil_radius)
    img[ring] += amplitude * _sample_texture(texture, t, phi[ring] - rotation)
    img[dist <= pupil_radius] = PUPIL_LEVEL

    if contrast != 1.0:
        img = 128.0 + contrast * (img - 128.0)
    if noise_sigma > 0.0:
        if rng is None:
            raise ValueError("noise requires an rng")
        img = img + rng.normal(scale=noise_sigma, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _distinct_textures(rng: np.random.Generator, count: int) -> list[np.ndarray]:
    """Rejection-sample identity textures with pairwise correlation below
    the bound, on a decimated grid matching the matcher's resolution."""
    textures: list[np.ndarray] = []
    probes: list[np.ndarray] = []
    while len(textures) < count:
        candidate = generate_identity_texture(rng)
        probe = candidate[::4, ::4].ravel()
        probe = (probe - probe.mean()) / probe.std()
        if any(float(np.dot(probe, other)) / probe.size >= MAX_IDENTITY_CORRELATION
               for other in probes):
            continue
        textures.append(candidate)
        probes.append(probe)
    return textures


def synthesize_corpus(subjects: int, images_per_subject: int, seed: int,
                      out_dir: Path | str, *, size: int = 256,
                      iris_radius_range: tuple[float, float] = (72.0, 92.0),
                      noise_sigma: float = 5.0,
                      max_rotation_columns: int = 4) -> Corpus:
    """Write ``subjects * images_per_subject`` PGM eye images under
    ``out_dir``. Same seed, same bytes."""
    if subjects < 1 or images_per_subject < 1:
        raise ValueError("need at least one subject and one image per subject")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    textures = _distinct_textures(rng, subjects)

    samples: dict[tuple[int, int], Path] = {}
    column = 2.0 * np.pi / 128.0  # one angular sample of the normalized texture
    for subject in range(subjects):
        for index in range(images_per_subject):
            iris_r = rng.uniform(*iris_radius_range)
            pupil_r = iris_r * rng.uniform(0.36, 0.44)
            jitter = rng.uniform(-6.0, 6.0, size=2)
            rotation = int(rng.integers(-max_rotation_columns, max_rotation_columns + 1))
            image = render_eye(
                textures[subject],
                size=size,
                center=(size / 2.0 + jitter[0], size / 2.0 + jitter[1]),
                pupil_radius=pupil_r,
                iris_radius=iris_r,
                rotation=rotation * column,
                noise_sigma=noise_sigma,
                contrast=rng.uniform(0.92, 1.08),
                rng=rng,
            )
            path = out_dir / f"s{subject:02d}_i{index:02d}.pgm"
            write_pgm(path, image)
            samples[(subject, index)] = path
    return Corpus(subjects=subjects, images_per_subject=images_per_subject, samples=samples)


def load_corpus(directory: Path | str) -> Corpus:
    """Rebuild a Corpus from a directory written by synthesize_corpus."""
    directory = Path(directory)
    samples: dict[tuple[int, int], Path] = {}
    for path in sorted(directory.glob("s*_i*.pgm")):
        subject, index = path.stem.split("_")
        samples[(int(subject[1:]), int(index[1:]))] = path
    if not samples:
        raise ValueError(f"no corpus images under {directory}")
    subjects = max(key[0] for key in samples) + 1
    images = max(key[1] for key in samples) + 1
    missing = [(s, i) for s in range(subjects) for i in range(images)
               if (s, i) not in samples]
    if missing:
        raise ValueError(f"corpus incomplete, missing {missing[:4]}...")
    return Corpus(subjects=subjects, images_per_subject=images, samples=samples)
