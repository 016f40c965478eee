"""Reference ocular matchers and the shared image-analysis primitives.

Everything in here is pure and process-safe: no global state, no files
other than the images handed in, so any number of workers may call these
routines concurrently.
"""

from .images import ImageFormatError, load_gray, write_pgm
from .segmentation import IrisGeometry, SegmentationError, estimate_geometry
from .normalization import GeometryError, normalize_iris
from .gabor import (
    EncodeError,
    GaborFilterbank,
    IrisCode,
    MatchError,
    build_filterbank,
    encode,
    hamming_match,
)
from .periocular import match_periocular
from .matchers import get_matcher, matcher_names

__all__ = [
    "ImageFormatError",
    "load_gray",
    "write_pgm",
    "IrisGeometry",
    "SegmentationError",
    "estimate_geometry",
    "GeometryError",
    "normalize_iris",
    "EncodeError",
    "GaborFilterbank",
    "IrisCode",
    "MatchError",
    "build_filterbank",
    "encode",
    "hamming_match",
    "match_periocular",
    "get_matcher",
    "matcher_names",
]
