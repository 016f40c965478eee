"""Rubber-sheet unwrapping of the iris annulus.

Maps the ring between the pupil and iris circles onto a fixed-size
rectangle in (radius, angle) coordinates: column j is the ray at angle
2*pi*j/angular_samples, rows walk from the pupil boundary out to the iris
boundary. Sampling is bilinear; radial positions sit at band centers so
neither boundary circle itself is sampled.
"""

from __future__ import annotations

import numpy as np

from .segmentation import IrisGeometry

DEFAULT_RADIAL_BANDS = 16
DEFAULT_ANGULAR_SAMPLES = 128


class GeometryError(Exception):
    pass


def normalize_iris(image: np.ndarray, geometry: IrisGeometry,
                   radial_bands: int = DEFAULT_RADIAL_BANDS,
                   angular_samples: int = DEFAULT_ANGULAR_SAMPLES) -> np.ndarray:
    """Unwrap the iris ring to a (radial_bands, angular_samples) texture."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    cx, cy = geometry.pupil_center
    if (cx - geometry.iris_radius < 0 or cx + geometry.iris_radius > w - 1
            or cy - geometry.iris_radius < 0 or cy + geometry.iris_radius > h - 1):
        raise GeometryError("geometry out of bounds")

    theta = 2.0 * np.pi * np.arange(angular_samples) / angular_samples
    band = (np.arange(radial_bands) + 0.5) / radial_bands
    r = geometry.pupil_radius + band * (geometry.iris_radius - geometry.pupil_radius)

    x = cx + r[:, None] * np.cos(theta)[None, :]
    y = cy + r[:, None] * np.sin(theta)[None, :]

    x0 = np.clip(np.floor(x).astype(np.intp), 0, w - 2)
    y0 = np.clip(np.floor(y).astype(np.intp), 0, h - 2)
    fx = x - x0
    fy = y - y0
    return (img[y0, x0] * (1 - fx) * (1 - fy)
            + img[y0, x0 + 1] * fx * (1 - fy)
            + img[y0 + 1, x0] * (1 - fx) * fy
            + img[y0 + 1, x0 + 1] * fx * fy)
