"""Periocular texture matching for eyes too small for iris coding.

Blockwise local binary patterns: the LBP map of each image is split into an
8x8 grid, each block summarized by a normalized 256-bin histogram, and the
dissimilarity is the mean half-L1 distance between corresponding block
histograms. Needs no segmentation, so it works on whatever ocular crop the
camera produced.
"""

from __future__ import annotations

import numpy as np

from .images import require_match_size, resize_bilinear

GRID = 8

# Neighbor offsets (dy, dx) in the order of their bit weights 1, 2, 4, ...
_NEIGHBORS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, 1), (1, 1), (1, 0),
    (1, -1), (0, -1),
)


def lbp_map(image: np.ndarray) -> np.ndarray:
    """Classic 8-neighbor LBP codes for the interior pixels."""
    img = np.asarray(image, dtype=np.int16)
    center = img[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for bit, (dy, dx) in enumerate(_NEIGHBORS):
        neighbor = img[1 + dy:img.shape[0] - 1 + dy, 1 + dx:img.shape[1] - 1 + dx]
        codes |= ((neighbor >= center).astype(np.uint8) << bit)
    return codes


def block_histograms(codes: np.ndarray, grid: int = GRID) -> np.ndarray:
    """(grid*grid, 256) histograms, each normalized to sum 1."""
    histograms = np.zeros((grid * grid, 256), dtype=np.float64)
    index = 0
    for rows in np.array_split(codes, grid, axis=0):
        for block in np.array_split(rows, grid, axis=1):
            counts = np.bincount(block.ravel(), minlength=256).astype(np.float64)
            histograms[index] = counts / block.size
            index += 1
    return histograms


def match_periocular(image_a: np.ndarray, image_b: np.ndarray) -> float:
    """Dissimilarity in [0, 1]; 0 only for identical texture statistics.

    A size mismatch is handled by rescaling the smaller image up to the
    larger one's dimensions before blocking.
    """
    a = require_match_size(np.asarray(image_a))
    b = require_match_size(np.asarray(image_b))
    if a.shape != b.shape:
        if a.shape[0] * a.shape[1] < b.shape[0] * b.shape[1]:
            a = resize_bilinear(a, b.shape)
        else:
            b = resize_bilinear(b, a.shape)
    hist_a = block_histograms(lbp_map(a))
    hist_b = block_histograms(lbp_map(b))
    # Half the L1 distance of two unit-sum histograms lies in [0, 1].
    return float(np.abs(hist_a - hist_b).sum(axis=1).mean() / 2.0)
