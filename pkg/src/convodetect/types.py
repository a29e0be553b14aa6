"""Value types shared by the pipeline stages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import DetectorConfig

FEEDBACK_LABELS = ("yes", "no", "maybe")


class FrameAnalysis:
    """Tagger output for one frame: class scores plus an embedding.

    ``scores`` may be a dense vector of length ``num_classes`` or a sparse
    mapping ``class_id -> score`` where absent classes score 0.
    """

    __slots__ = ("_sparse", "_dense", "embedding", "num_classes")

    def __init__(
        self,
        scores: Mapping[int, float] | Sequence[float] | np.ndarray,
        embedding: Sequence[float] | np.ndarray,
        num_classes: int | None = None,
    ) -> None:
        self.embedding = np.asarray(embedding, dtype=np.float64)
        if self.embedding.ndim != 1:
            raise ValueError("embedding must be one-dimensional")
        if isinstance(scores, Mapping):
            if num_classes is None:
                num_classes = 521
            sparse = {int(k): float(v) for k, v in scores.items()}
            for k, v in sparse.items():
                if not 0 <= k < num_classes:
                    raise ValueError(f"class id {k} outside [0, {num_classes})")
                if not (math.isfinite(v) and v >= 0):
                    raise ValueError(f"score for class {k} must be finite and >= 0, got {v}")
            self._sparse = {k: v for k, v in sparse.items() if v != 0.0}
            self._dense = None
        else:
            dense = np.asarray(scores, dtype=np.float64)
            if dense.ndim != 1:
                raise ValueError("scores must be one-dimensional")
            if num_classes is not None and len(dense) != num_classes:
                raise ValueError(f"expected {num_classes} scores, got {len(dense)}")
            if not np.all(np.isfinite(dense)) or np.any(dense < 0):
                raise ValueError("scores must be finite and >= 0")
            num_classes = len(dense)
            self._dense = dense
            self._sparse = None
        self.num_classes = int(num_classes)

    @property
    def dense_scores(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        out = np.zeros(self.num_classes)
        for k, v in self._sparse.items():
            out[k] = v
        return out

    @property
    def sparse_scores(self) -> dict[int, float]:
        if self._sparse is not None:
            return dict(self._sparse)
        nz = np.flatnonzero(self._dense)
        return {int(k): float(self._dense[k]) for k in nz}

    def check(self, cfg: DetectorConfig) -> None:
        if self.num_classes != cfg.num_classes:
            raise ValueError(f"frame has {self.num_classes} classes, config expects {cfg.num_classes}")
        if len(self.embedding) != cfg.embedding_dim:
            raise ValueError(
                f"embedding length {len(self.embedding)} != embedding_dim {cfg.embedding_dim}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameAnalysis):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and np.array_equal(self.dense_scores, other.dense_scores)
            and np.array_equal(self.embedding, other.embedding)
        )

    def __repr__(self) -> str:
        return f"FrameAnalysis(scores={self.sparse_scores}, embedding_dim={len(self.embedding)})"


class RecordingWindow:
    """One duty-cycle capture, stored column-wise.

    Scores are kept in coordinate form (frame index, class id, value) so that a
    long trace does not hold a dense ``frames x num_classes`` matrix per
    recording. ``embeddings`` is a ``(n_frames, embedding_dim)`` array.
    """

    __slots__ = ("rec_ts", "n_frames", "num_classes", "score_frame", "score_class", "score_value", "embeddings")

    def __init__(
        self,
        rec_ts: float,
        embeddings: np.ndarray,
        score_frame: np.ndarray,
        score_class: np.ndarray,
        score_value: np.ndarray,
        num_classes: int = 521,
    ) -> None:
        self.rec_ts = float(rec_ts)
        self.embeddings = np.asarray(embeddings, dtype=np.float64)
        if self.embeddings.ndim != 2:
            raise ValueError("embeddings must be a 2-d array (n_frames, embedding_dim)")
        self.n_frames = self.embeddings.shape[0]
        self.num_classes = int(num_classes)
        self.score_frame = np.asarray(score_frame, dtype=np.intp)
        self.score_class = np.asarray(score_class, dtype=np.intp)
        self.score_value = np.asarray(score_value, dtype=np.float64)
        if not (len(self.score_frame) == len(self.score_class) == len(self.score_value)):
            raise ValueError("score coordinate arrays differ in length")
        if len(self.score_frame):
            if self.score_frame.min() < 0 or self.score_frame.max() >= self.n_frames:
                raise ValueError("score frame index out of range")
            if self.score_class.min() < 0 or self.score_class.max() >= self.num_classes:
                raise ValueError("score class id out of range")
            if not np.all(np.isfinite(self.score_value)) or np.any(self.score_value < 0):
                raise ValueError("scores must be finite and >= 0")
            keys = self.score_frame * self.num_classes + self.score_class
            if len(np.unique(keys)) != len(keys):
                raise ValueError("duplicate (frame, class) score entry")

    @classmethod
    def _trusted(cls, rec_ts, embeddings, score_frame, score_class, score_value, num_classes) -> "RecordingWindow":
        # skips validation; callers guarantee well-formed arrays
        self = cls.__new__(cls)
        self.rec_ts = float(rec_ts)
        self.embeddings = embeddings
        self.n_frames = embeddings.shape[0]
        self.num_classes = int(num_classes)
        self.score_frame = score_frame
        self.score_class = score_class
        self.score_value = score_value
        return self

    @classmethod
    def from_frames(cls, rec_ts: float, frames: Iterable[FrameAnalysis], cfg: DetectorConfig) -> "RecordingWindow":
        frames = list(frames)
        for f in frames:
            f.check(cfg)
        fi, ci, vals = [], [], []
        for i, f in enumerate(frames):
            for k, v in sorted(f.sparse_scores.items()):
                fi.append(i)
                ci.append(k)
                vals.append(v)
        emb = np.array([f.embedding for f in frames]).reshape(len(frames), cfg.embedding_dim)
        return cls(rec_ts, emb, np.array(fi, dtype=np.intp), np.array(ci, dtype=np.intp), np.array(vals), cfg.num_classes)

    def dense_scores(self) -> np.ndarray:
        """Return the ``(n_frames, num_classes)`` score matrix."""
        out = np.zeros((self.n_frames, self.num_classes))
        out[self.score_frame, self.score_class] = self.score_value
        return out

    @property
    def frames(self) -> list[FrameAnalysis]:
        dense = self.dense_scores()
        return [FrameAnalysis(dense[i], self.embeddings[i]) for i in range(self.n_frames)]

    def check(self, cfg: DetectorConfig) -> None:
        """Raise ValueError if the window does not fit ``cfg``."""
        if self.num_classes != cfg.num_classes:
            raise ValueError(f"window has {self.num_classes} classes, config expects {cfg.num_classes}")
        if self.n_frames and self.embeddings.shape[1] != cfg.embedding_dim:
            raise ValueError(
                f"embedding length {self.embeddings.shape[1]} != embedding_dim {cfg.embedding_dim}"
            )
        if self.n_frames * cfg.frame_len_s > cfg.record_len_s + cfg.frame_len_s + 1e-9:
            raise ValueError(f"{self.n_frames} frames do not fit in a {cfg.record_len_s} s recording")


@dataclass(frozen=True)
class InteractionState:
    """State carried between duty cycles.

    Foreground speech and recorded time are tracked as integer counts
    (frames classified FS, recordings made) so the percentage is computed the
    same way on every code path; the seconds views are derived.
    """

    interact_on: bool = False
    start_time: float | None = None
    fs_frames: int = 0
    n_recordings: int = 0
    last_ts: float | None = None
    frame_len_s: float = 0.48
    record_len_s: float = 16.0

    def __post_init__(self) -> None:
        if self.interact_on != (self.start_time is not None):
            raise ValueError("start_time must be set exactly when interact_on is true")
        if self.fs_frames < 0 or self.n_recordings < 0:
            raise ValueError("counters must be >= 0")
        if self.n_fs_s > self.t_rec_s + 1e-9:
            raise ValueError("foreground speech exceeds recorded time")

    @classmethod
    def initial(cls, cfg: DetectorConfig) -> "InteractionState":
        return cls(frame_len_s=cfg.frame_len_s, record_len_s=cfg.record_len_s)

    @property
    def n_fs_s(self) -> float:
        return self.fs_frames * self.frame_len_s

    @property
    def t_rec_s(self) -> float:
        return self.n_recordings * self.record_len_s


def fs_percent(fs_frames: int, n_recordings: int, frame_len_s: float, record_len_s: float) -> float:
    """Percentage of recorded time classified as foreground speech (0 if nothing recorded)."""
    if n_recordings == 0:
        return 0.0
    return 100.0 * (fs_frames * frame_len_s) / (n_recordings * record_len_s)


@dataclass(frozen=True)
class Interaction:
    start: float
    end: float
    fs_pct_at_close: float
    close_reason: str = "cue_dropout"

    def __post_init__(self) -> None:
        if not self.end > self.start:
            raise ValueError(f"interaction end {self.end} must be after start {self.start}")
        if self.close_reason not in ("cue_dropout", "off_body"):
            raise ValueError(f"unknown close_reason {self.close_reason!r}")

    @property
    def duration_s(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class FeedbackRecord:
    interaction_id: int | str
    label: str
    label_ts: float | None = None

    def __post_init__(self) -> None:
        if self.label not in FEEDBACK_LABELS:
            raise ValueError(f"feedback label must be one of {FEEDBACK_LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class GroundTruthInterval:
    start: float
    end: float
    kind: str = "in_person"

    def __post_init__(self) -> None:
        if not self.end > self.start:
            raise ValueError("ground-truth interval needs end > start")
        if self.kind not in ("in_person", "virtual"):
            raise ValueError(f"unknown interval kind {self.kind!r}")


__all__ = [
    "FEEDBACK_LABELS",
    "FeedbackRecord",
    "FrameAnalysis",
    "GroundTruthInterval",
    "Interaction",
    "InteractionState",
    "RecordingWindow",
    "fs_percent",
]
