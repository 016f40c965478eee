"""Periocular matcher plugin: blockwise LBP histograms, half-L1 distance."""

from __future__ import annotations

import sys


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: periocular_plugin <image_a> <image_b>", file=sys.stderr)
        return 2
    try:
        from ocumatch.matching.images import load_gray
        from ocumatch.matching.periocular import match_periocular

        score = match_periocular(load_gray(argv[0]), load_gray(argv[1]))
    except Exception as exc:
        print(f"periocular matching failed: {exc}", file=sys.stderr)
        return 1
    print(f"{score:.12f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
