"""Iris matcher plugin: segmentation, normalization, Gabor coding, Hamming.

The filterbank defaults to parameter set B; deployments that register
several instances of this matcher select a set via the OCUMATCH_FILTERBANK
environment variable baked into their wrapper script.
"""

from __future__ import annotations

import os
import sys


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: iris_plugin <image_a> <image_b>", file=sys.stderr)
        return 2

    from ocumatch.matching import matchers

    parameter_set = os.environ.get("OCUMATCH_FILTERBANK", "B").upper()
    matcher = matchers.get_matcher(f"gabor-iris-{parameter_set.lower()}")
    try:
        from ocumatch.matching.images import load_gray

        score = matcher.match(load_gray(argv[0]), load_gray(argv[1]))
    except Exception as exc:
        print(f"iris matching failed: {exc}", file=sys.stderr)
        return 1
    print(f"{score:.12f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
