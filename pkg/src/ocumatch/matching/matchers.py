"""Catalog of the bundled reference matchers.

Each matcher splits into a per-image feature stage and a pairwise compare
stage so evaluation over all pairs of a corpus extracts every image once.
The plugin executables and the evaluation harness both resolve matchers
from here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gabor import DEFAULT_SHIFT_RANGE, IrisCode, build_filterbank, encode, hamming_match
from .images import require_match_size
from .normalization import normalize_iris
from .periocular import block_histograms, lbp_map
from .segmentation import estimate_geometry


@dataclass(frozen=True)
class PairMatcher:
    """extract() runs once per image; compare() scores a pair of features."""

    name: str
    extract: Callable[[np.ndarray], object]
    compare: Callable[[object, object], float]

    def match(self, image_a: np.ndarray, image_b: np.ndarray) -> float:
        return self.compare(self.extract(image_a), self.extract(image_b))


def _iris_extract(image: np.ndarray, parameter_set: str) -> IrisCode:
    image = require_match_size(np.asarray(image))
    geometry = estimate_geometry(image)
    texture = normalize_iris(image, geometry)
    return encode(texture, build_filterbank(parameter_set))


def _iris_matcher(parameter_set: str, name: str) -> PairMatcher:
    return PairMatcher(
        name=name,
        extract=lambda img: _iris_extract(img, parameter_set),
        compare=lambda a, b: hamming_match(a, b, DEFAULT_SHIFT_RANGE),
    )


def _periocular_extract(image: np.ndarray) -> np.ndarray:
    return block_histograms(lbp_map(require_match_size(np.asarray(image))))


def _periocular_compare(hist_a: np.ndarray, hist_b: np.ndarray) -> float:
    if hist_a.shape != hist_b.shape:
        raise ValueError("periocular features of mismatched shape")
    return float(np.abs(hist_a - hist_b).sum(axis=1).mean() / 2.0)


_CATALOG: dict[str, Callable[[], PairMatcher]] = {
    "gabor-iris-a": lambda: _iris_matcher("A", "gabor-iris-a"),
    "gabor-iris-b": lambda: _iris_matcher("B", "gabor-iris-b"),
    "gabor-iris-c": lambda: _iris_matcher("C", "gabor-iris-c"),
    # Registered service id; parameter set B is the deployment default.
    "gabor-iris": lambda: _iris_matcher("B", "gabor-iris"),
    "periocular-lbp": lambda: PairMatcher(
        name="periocular-lbp",
        extract=_periocular_extract,
        compare=_periocular_compare,
    ),
}


def matcher_names() -> list[str]:
    return sorted(_CATALOG)


def get_matcher(name: str) -> PairMatcher:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown matcher: {name!r} (known: {', '.join(matcher_names())})") from None
    return factory()
