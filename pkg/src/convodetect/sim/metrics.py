"""Session metrics against ground truth and participant feedback."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..types import FEEDBACK_LABELS, GroundTruthInterval, Interaction

logger = logging.getLogger(__name__)

# duration buckets: under 1 min, 1-2 min, 2 min and longer
DURATION_EDGES_S = (60.0, 120.0)


@dataclass
class SessionMetrics:
    detections: list[Interaction]
    accuracy_pct: float | None = None
    maybe_pct: float | None = None
    recall: float | None = None
    boundary_errors: list[tuple[float, float]] = field(default_factory=list)
    fs_pct_by_outcome: dict[str, list[float]] = field(default_factory=dict)
    duration_histogram: tuple[int, int, int] = (0, 0, 0)
    n_feedback: int = 0
    n_yes: int = 0

    def to_dict(self) -> dict:
        return {
            "n_detections": len(self.detections),
            "accuracy_pct": self.accuracy_pct,
            "maybe_pct": self.maybe_pct,
            "recall": self.recall,
            "boundary_errors": [list(b) for b in self.boundary_errors],
            "fs_pct_by_outcome": self.fs_pct_by_outcome,
            "duration_histogram": list(self.duration_histogram),
            "n_feedback": self.n_feedback,
            "n_yes": self.n_yes,
        }


def overlap(a_start: float, a_end: float, b_start: float, b_end: float) -> float:
    return max(0.0, min(a_end, b_end) - max(a_start, b_start))


def match_ground_truth(
    detections: Sequence[Interaction], truth: Sequence[GroundTruthInterval]
) -> list[int | None]:
    """For each detection, the index of the ground-truth interval it overlaps most.

    Ties go to the interval with the earlier start. Detections overlapping no
    interval map to None.
    """
    order = sorted(range(len(truth)), key=lambda k: (truth[k].start, k))
    out: list[int | None] = []
    for d in detections:
        best, best_ov = None, 0.0
        for k in order:
            ov = overlap(d.start, d.end, truth[k].start, truth[k].end)
            if ov > best_ov:
                best, best_ov = k, ov
        out.append(best)
    return out


def duration_histogram(durations: Iterable[float]) -> tuple[int, int, int]:
    d = np.asarray(list(durations), dtype=np.float64)
    lo, hi = DURATION_EDGES_S
    return int(np.sum(d < lo)), int(np.sum((d >= lo) & (d < hi))), int(np.sum(d >= hi))


def feedback_rates(labels: Iterable[str]) -> tuple[float | None, float | None, int, int]:
    """Return (accuracy %, maybe %, #labelled, #yes); percentages are None with no labels."""
    labels = list(labels)
    n = len(labels)
    yes = sum(1 for lab in labels if lab == "yes")
    if n == 0:
        return None, None, 0, 0
    maybe = sum(1 for lab in labels if lab == "maybe")
    return 100.0 * yes / n, 100.0 * maybe / n, n, yes


def resolve_feedback(n_detections: int, feedback: Iterable[tuple[int, str]]) -> dict[int, str]:
    """Map detection index to its label; the last label for an index wins.

    References to detections that do not exist are dropped with a warning.
    """
    labels: dict[int, str] = {}
    for idx, label in feedback:
        if label not in FEEDBACK_LABELS:
            raise ValueError(f"feedback label {label!r} not in {FEEDBACK_LABELS}")
        if not 0 <= idx < n_detections:
            logger.warning("feedback for detection %d ignored: only %d detections", idx, n_detections)
            continue
        labels[idx] = label
    return labels


def compute_metrics(detections: Sequence[Interaction], trace) -> SessionMetrics:
    """Fill a SessionMetrics from detections and the trace's ground truth and feedback."""
    truth = trace.ground_truth
    labels = resolve_feedback(len(detections), ((f.interaction_index, f.label) for f in trace.feedback))
    accuracy, maybe, n_fb, n_yes = feedback_rates(labels.values())

    recall = None
    boundary: list[tuple[float, float]] = []
    if truth:
        matched = match_ground_truth(detections, truth)
        hit = {k for k in matched if k is not None}
        recall = len(hit) / len(truth)
        for d, k in zip(detections, matched):
            if k is not None:
                boundary.append((d.start - truth[k].start, d.end - truth[k].end))

    by_outcome: dict[str, list[float]] = {}
    for i, d in enumerate(detections):
        by_outcome.setdefault(labels.get(i, "unlabeled"), []).append(d.fs_pct_at_close)

    return SessionMetrics(
        detections=list(detections),
        accuracy_pct=accuracy,
        maybe_pct=maybe,
        recall=recall,
        boundary_errors=boundary,
        fs_pct_by_outcome=by_outcome,
        duration_histogram=duration_histogram(d.duration_s for d in detections),
        n_feedback=n_fb,
        n_yes=n_yes,
    )


def auto_feedback(detections: Sequence[Interaction], truth: Sequence[GroundTruthInterval]) -> list[tuple[int, str]]:
    """Simulated participant answers: yes if a detection overlaps ground truth, else no."""
    matched = match_ground_truth(detections, truth)
    return [(i, "no" if k is None else "yes") for i, k in enumerate(matched)]
