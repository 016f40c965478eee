"""Pupil and iris boundary estimation.

A discretized integro-differential search: both boundaries are circles, so
we look for the circle whose radial derivative of mean intensity along the
ring is largest. Iris images (and our synthetic corpus) get brighter going
outward at both boundaries — pupil to iris and iris to sclera — so only
positive, outward edges are scored. The search is coarse-to-fine over
center and radius and entirely deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Minimum believable pupil radius, px.
MIN_RADIUS = 6
# A boundary's mean radial derivative (intensity per px) must clear this.
DEFAULT_EDGE_FLOOR = 4.0
# Iris radius must exceed pupil radius by both of these factors.
MIN_RADIUS_RATIO = 1.25
MIN_RADIUS_GAP = 5.0


class SegmentationError(Exception):
    pass


@dataclass(frozen=True)
class IrisGeometry:
    """Pupil/iris circles, concentric by construction of the estimator."""

    pupil_center: tuple[float, float]  # (x, y)
    pupil_radius: float
    iris_radius: float

    def __post_init__(self) -> None:
        if not self.pupil_radius < self.iris_radius:
            raise SegmentationError("pupil radius must be smaller than iris radius")


def _box_blur3(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out += padded[dy:dy + img.shape[0], dx:dx + img.shape[1]]
    return out / 9.0


def _ring_samples(img: np.ndarray, cx: np.ndarray, cy: np.ndarray, radii: np.ndarray,
                  n_angles: int, *, bilinear: bool = False) -> np.ndarray:
    """Intensities on circles: shape (len(cx), len(radii), n_angles).

    Samples falling outside the image clamp to the border; callers mask out
    radii that do not fit when that distortion matters.
    """
    theta = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    x = cx[:, None, None] + radii[None, :, None] * np.cos(theta)[None, None, :]
    y = cy[:, None, None] + radii[None, :, None] * np.sin(theta)[None, None, :]
    h, w = img.shape
    if bilinear:
        x0 = np.clip(np.floor(x).astype(np.intp), 0, w - 2)
        y0 = np.clip(np.floor(y).astype(np.intp), 0, h - 2)
        fx = np.clip(x - x0, 0.0, 1.0)
        fy = np.clip(y - y0, 0.0, 1.0)
        return (img[y0, x0] * (1 - fx) * (1 - fy)
                + img[y0, x0 + 1] * fx * (1 - fy)
                + img[y0 + 1, x0] * (1 - fx) * fy
                + img[y0 + 1, x0 + 1] * fx * fy)
    xi = np.clip(np.rint(x).astype(np.intp), 0, w - 1)
    yi = np.clip(np.rint(y).astype(np.intp), 0, h - 1)
    return img[yi, xi]


def _edge_response(samples: np.ndarray, radial_step: float) -> np.ndarray:
    """Median-over-angles outward derivative: shape (centers, radii - 1).

    The median makes the response specific to *circular* boundaries: a true
    boundary jumps at every angle simultaneously, while a straight edge
    crossing an off-center ring moves only a few angle samples and scores
    near zero.
    """
    return np.median(np.diff(samples, axis=1), axis=2) / radial_step


def _best_boundary_pair(edges: np.ndarray, radii: np.ndarray,
                        floor: float) -> tuple[int, int, float] | None:
    """Strongest (pupil, iris) radius pair respecting the ratio/gap guard.

    ``edges[i]`` is the outward derivative between radii[i] and radii[i+1].
    Returns (i_pupil, i_iris, combined strength) or None if no pair clears
    the floor.
    """
    r = radii[:-1]
    valid = edges >= floor
    if valid.sum() < 2:
        return None
    pair = edges[:, None] + edges[None, :]
    separated = r[None, :] >= np.maximum(MIN_RADIUS_RATIO * r[:, None],
                                         r[:, None] + MIN_RADIUS_GAP)
    allowed = separated & valid[:, None] & valid[None, :]
    if not allowed.any():
        return None
    pair = np.where(allowed, pair, -np.inf)
    i, j = np.unravel_index(np.argmax(pair), pair.shape)
    return int(i), int(j), float(pair[i, j])


def _erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary erosion with a (2*radius+1)^2 square element."""
    k = 2 * radius + 1
    h, w = mask.shape
    padded = np.pad(mask, radius, constant_values=False)
    out = np.ones_like(mask)
    for dy in range(k):
        for dx in range(k):
            out &= padded[dy:dy + h, dx:dx + w]
    return out


def _pupil_centroid(img: np.ndarray) -> tuple[float, float]:
    """Center of the large dark-disk blob that is the pupil.

    Threshold a quarter of the way from the darkest level to the image
    median, then erode so isolated dark texture specks cannot survive;
    only a solid dark region the size of a plausible pupil does.
    """
    darkest = float(img.min())
    median = float(np.median(img))
    threshold = darkest + 0.25 * (median - darkest)
    core = _erode(img < threshold, 2)
    if not core.any():
        raise SegmentationError("segmentation failed")
    ys, xs = np.nonzero(core)
    return float(xs.mean()), float(ys.mean())


def estimate_geometry(image: np.ndarray, *, edge_floor: float = DEFAULT_EDGE_FLOOR) -> IrisGeometry:
    """Locate the pupil and iris circles of an eye image.

    Raises :class:`SegmentationError` when no circular edge clears the
    contrast floor (e.g. a uniform image) or when no valid pupil/iris pair
    exists.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 64:
        raise SegmentationError("image too small to segment (need at least 64x64)")
    img = _box_blur3(img)
    h, w = img.shape

    # Stage 1: coarse center from the dark pupil blob.
    cx0, cy0 = _pupil_centroid(img)
    r_max_global = min(h, w) // 2 - 2

    # Stage 2: fine search over a small center window; at each candidate
    # center take the full radial edge profile and the best boundary pair.
    offsets = np.arange(-3, 4, dtype=np.float64)
    fy, fx = np.meshgrid(offsets, offsets, indexing="ij")
    cand_x = np.clip(cx0 + fx.ravel(), 1, w - 2)
    cand_y = np.clip(cy0 + fy.ravel(), 1, h - 2)
    fine_radii = np.arange(MIN_RADIUS, r_max_global + 1, dtype=np.float64)
    edge_profiles = _edge_response(
        _ring_samples(img, cand_x, cand_y, fine_radii, 64, bilinear=True), 1.0)

    # Radii whose circle pokes outside a candidate's frame are not trusted.
    fit_limit = np.minimum(np.minimum(cand_x, w - 1 - cand_x),
                           np.minimum(cand_y, h - 1 - cand_y)) - 1
    edge_profiles = np.where(fine_radii[None, :-1] + 1 <= fit_limit[:, None],
                             edge_profiles, -np.inf)

    best: tuple[float, int, int, int] | None = None
    for c in range(len(cand_x)):
        pair = _best_boundary_pair(edge_profiles[c], fine_radii, edge_floor)
        if pair is None:
            continue
        i, j, strength = pair
        if best is None or strength > best[0]:
            best = (strength, c, i, j)
    if best is None:
        raise SegmentationError("segmentation failed")

    _, c, i, j = best
    # The derivative between radii r and r+1 localizes the edge at r + 0.5.
    return IrisGeometry(
        pupil_center=(float(cand_x[c]), float(cand_y[c])),
        pupil_radius=float(fine_radii[i]) + 0.5,
        iris_radius=float(fine_radii[j]) + 0.5,
    )
