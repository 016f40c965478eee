"""ROC curves over dissimilarity scores.

Convention, fixed once for the whole suite: a pair is accepted when its
dissimilarity is strictly below the threshold; a tie rejects. So
FAR(t) = P(impostor < t), FRR(t) = P(genuine >= t), GAR = 1 - FRR, and all
three are monotone in the threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_THRESHOLD_COUNT = 200


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    far: float
    frr: float
    gar: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple[RocPoint, ...]

    def far_values(self) -> np.ndarray:
        return np.array([p.far for p in self.points])

    def frr_values(self) -> np.ndarray:
        return np.array([p.frr for p in self.points])


def default_thresholds() -> np.ndarray:
    return np.linspace(0.0, 1.0, DEFAULT_THRESHOLD_COUNT)


def roc(genuine_scores, impostor_scores, thresholds=None) -> RocCurve:
    genuine = np.asarray(list(genuine_scores), dtype=np.float64)
    impostor = np.asarray(list(impostor_scores), dtype=np.float64)
    if genuine.size == 0 or impostor.size == 0:
        raise EvalError("no scores")
    if thresholds is None:
        thresholds = default_thresholds()
    thresholds = np.sort(np.asarray(thresholds, dtype=np.float64))
    points = []
    for threshold in thresholds:
        far = float(np.mean(impostor < threshold))
        frr = float(np.mean(genuine >= threshold))
        points.append(RocPoint(threshold=float(threshold), far=far, frr=frr, gar=1.0 - frr))
    return RocCurve(points=tuple(points))


def eer(curve: RocCurve) -> float:
    """FAR at the FAR = FRR operating point, interpolated on the curve.

    FAR - FRR is non-decreasing in the threshold, so the crossing is
    bracketed by adjacent points; within the bracket both rates are
    interpolated linearly.
    """
    if len(curve.points) < 2:
        raise EvalError("curve too short for EER")
    far = curve.far_values()
    frr = curve.frr_values()
    diff = far - frr
    crossings = np.nonzero((diff[:-1] <= 0.0) & (diff[1:] >= 0.0))[0]
    if crossings.size == 0:
        return float(far[int(np.argmin(np.abs(diff)))])
    i = int(crossings[0])
    if diff[i + 1] == diff[i]:
        return float(far[i])
    u = -diff[i] / (diff[i + 1] - diff[i])
    return float(far[i] + u * (far[i + 1] - far[i]))


def write_curve_csv(curve: RocCurve, path: Path | str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "far", "frr", "gar"])
        for point in curve.points:
            writer.writerow([f"{point.threshold:.6f}", f"{point.far:.6f}",
                             f"{point.frr:.6f}", f"{point.gar:.6f}"])
