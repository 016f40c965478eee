"""Evaluation harness: synthetic corpora, pairwise scoring, ROC analysis,
and the end-to-end automatic-selection experiment."""

from .corpus import Corpus, generate_identity_texture, render_eye, synthesize_corpus
from .pairs import ScoreSet, pair_counts, score_all_pairs
from .roc import EvalError, RocCurve, RocPoint, eer, roc, write_curve_csv
from .selection import selection_experiment

__all__ = [
    "Corpus",
    "generate_identity_texture",
    "render_eye",
    "synthesize_corpus",
    "ScoreSet",
    "pair_counts",
    "score_all_pairs",
    "EvalError",
    "RocCurve",
    "RocPoint",
    "eer",
    "roc",
    "write_curve_csv",
    "selection_experiment",
]
