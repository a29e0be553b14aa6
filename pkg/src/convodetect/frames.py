"""Per-recording analysis: frame pairing, cue labeling and cue percentage."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DetectorConfig
from .types import RecordingWindow


@dataclass(frozen=True)
class FramePair:
    index: int
    mean_scores: np.ndarray
    label_class: int
    is_cue: bool
    member_embeddings: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class RecordingAnalysis:
    """Summary of one recording.

    ``labels``/``cue_mask`` hold one entry per frame pair. ``conv_embeddings``
    stacks the member-frame embeddings of the cue pairs in pair order.
    """

    labels: np.ndarray
    cue_mask: np.ndarray
    cue_pct: float
    conv_embeddings: np.ndarray

    @property
    def n_pairs(self) -> int:
        return len(self.labels)

    @property
    def n_cue_pairs(self) -> int:
        return int(self.cue_mask.sum())

    @classmethod
    def from_counts(cls, n_pairs: int, n_cue_pairs: int, conv_embeddings: np.ndarray) -> "RecordingAnalysis":
        """Build an analysis directly from cue counts (for tests and adapters)."""
        mask = np.zeros(n_pairs, dtype=bool)
        mask[:n_cue_pairs] = True
        return cls(
            labels=np.where(mask, 0, -1),
            cue_mask=mask,
            cue_pct=cue_percent(n_cue_pairs, n_pairs),
            conv_embeddings=np.asarray(conv_embeddings, dtype=np.float64),
        )


@lru_cache(maxsize=32)
def cue_lookup(cfg: DetectorConfig) -> np.ndarray:
    """Boolean table indexed by class id: True for conversation cues."""
    table = np.zeros(cfg.num_classes, dtype=bool)
    table[sorted(cfg.cue_class_ids)] = True
    table.setflags(write=False)
    return table


def cue_percent(n_cue_pairs: int, n_pairs: int) -> float:
    # fewer frames than one pair carries no evidence of conversation
    if n_pairs == 0:
        return 0.0
    return 100.0 * n_cue_pairs / n_pairs


def _pair_means(window: RecordingWindow, cfg: DetectorConfig) -> np.ndarray:
    n_pairs = window.n_frames // cfg.pair_size
    used = n_pairs * cfg.pair_size
    dense = window.dense_scores()[:used]
    return dense.reshape(n_pairs, cfg.pair_size, cfg.num_classes).mean(axis=1)


def pair_frames(window: RecordingWindow, cfg: DetectorConfig) -> list[FramePair]:
    """Group consecutive frames into pairs and label each pair by its argmax.

    A trailing frame that does not complete a pair is dropped. Argmax ties go
    to the smallest class index.
    """
    window.check(cfg)
    means = _pair_means(window, cfg)
    labels = means.argmax(axis=1) if len(means) else np.zeros(0, dtype=np.intp)
    pairs = []
    for j, (mean, label) in enumerate(zip(means, labels)):
        members = tuple(window.embeddings[j * cfg.pair_size + k] for k in range(cfg.pair_size))
        pairs.append(FramePair(j, mean, int(label), int(label) in cfg.cue_class_ids, members))
    return pairs


def analyze_recording(window: RecordingWindow, cfg: DetectorConfig) -> RecordingAnalysis:
    """Compute cue percentage and cue-pair embeddings for one recording."""
    window.check(cfg)
    n_pairs = window.n_frames // cfg.pair_size
    if n_pairs == 0:
        return RecordingAnalysis(
            labels=np.zeros(0, dtype=np.intp),
            cue_mask=np.zeros(0, dtype=bool),
            cue_pct=0.0,
            conv_embeddings=np.zeros((0, cfg.embedding_dim)),
        )
    labels = _pair_means(window, cfg).argmax(axis=1)
    cue_mask = cue_lookup(cfg)[labels]
    frame_mask = np.repeat(cue_mask, cfg.pair_size)
    conv = window.embeddings[: n_pairs * cfg.pair_size][frame_mask]
    return RecordingAnalysis(
        labels=labels,
        cue_mask=cue_mask,
        cue_pct=cue_percent(int(cue_mask.sum()), n_pairs),
        conv_embeddings=conv,
    )
