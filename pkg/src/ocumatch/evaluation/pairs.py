"""Pair enumeration and exhaustive corpus scoring."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..matching import load_gray
from ..matching.matchers import get_matcher
from .corpus import Corpus


def pair_counts(subjects: int, images_per_subject: int) -> tuple[int, int]:
    """(genuine, impostor) comparison counts for an N-subject corpus with t
    images each: N*t*(t-1)/2 same-subject pairs and N*(N-1)*t^2/2
    cross-subject pairs."""
    if subjects < 1 or images_per_subject < 1:
        raise ValueError("subjects and images_per_subject must be positive")
    n, t = subjects, images_per_subject
    genuine = n * t * (t - 1) // 2
    impostor = n * (n - 1) * t * t // 2
    return genuine, impostor


@dataclass
class ScoreSet:
    genuine: list[float] = field(default_factory=list)
    impostor: list[float] = field(default_factory=list)
    exclusions: list[dict] = field(default_factory=list)

    @property
    def exclusion_count(self) -> int:
        return len(self.exclusions)


def score_all_pairs(corpus: Corpus, matcher: str) -> ScoreSet:
    """Match every unordered image pair of the corpus exactly once.

    Features are extracted once per image; a pair lands in ``genuine`` when
    both images share a subject. Failed extractions or comparisons are
    recorded with the pair identity and excluded, so
    len(genuine) + len(impostor) + exclusions covers all C(N*t, 2) pairs.
    """
    pair_matcher = get_matcher(matcher)
    keys = corpus.keys()

    features: dict[tuple[int, int], object] = {}
    failures: dict[tuple[int, int], str] = {}
    for key in keys:
        try:
            features[key] = pair_matcher.extract(load_gray(corpus.path(*key)))
        except Exception as exc:
            failures[key] = str(exc)

    result = ScoreSet()
    for i, key_a in enumerate(keys):
        for key_b in keys[i + 1:]:
            if key_a in failures or key_b in failures:
                reason = failures.get(key_a) or failures.get(key_b)
                result.exclusions.append({"pair": [list(key_a), list(key_b)],
                                          "error": reason})
                continue
            try:
                score = pair_matcher.compare(features[key_a], features[key_b])
            except Exception as exc:
                result.exclusions.append({"pair": [list(key_a), list(key_b)],
                                          "error": str(exc)})
                continue
            if key_a[0] == key_b[0]:
                result.genuine.append(score)
            else:
                result.impostor.append(score)
    return result
