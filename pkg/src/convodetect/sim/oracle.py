"""Batch re-derivation of the detections in a trace.

Used to cross-check the streaming state machine. Instead of carrying state
from event to event, this materialises every recording's cue label and FS
count, splits the timeline into maximal runs of cue-positive recordings, and
decides each run's fate from whatever ends it. Pair labels are recomputed
from the sparse scores with plain Python rather than the array pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import DetectorConfig
from ..fsd import FsDetector
from ..types import Interaction, RecordingWindow
from .trace import RecordingEvent, Trace, WearEvent, validate_trace


def _frame_scores(window: RecordingWindow) -> list[list[tuple[int, float]]]:
    per_frame: list[list[tuple[int, float]]] = [[] for _ in range(window.n_frames)]
    for f, c, v in zip(window.score_frame.tolist(), window.score_class.tolist(), window.score_value.tolist()):
        per_frame[f].append((c, v))
    return per_frame


def _pair_label(per_frame: list[list[tuple[int, float]]], frames: list[int]) -> int:
    totals: dict[int, float] = {}
    # member scores summed per class in frame order; absent classes add 0.0
    for f in frames:
        for c, v in per_frame[f]:
            totals[c] = totals.get(c, 0.0) + v
    best_c, best_v = 0, 0.0
    for c in sorted(totals):
        v = totals[c] / len(frames)
        if v > best_v:
            best_c, best_v = c, v
    # scores are >= 0, so with no positive mean every class ties at 0 and class 0 wins
    return best_c


@dataclass(frozen=True)
class _Rec:
    ts: float
    cue: bool
    fs_frames: int


def _label_recording(window: RecordingWindow, fsd: FsDetector, cfg: DetectorConfig) -> _Rec:
    ps = cfg.pair_size
    n_pairs = window.n_frames // ps
    per_frame = _frame_scores(window)
    cue_pairs = []
    for j in range(n_pairs):
        members = list(range(j * ps, (j + 1) * ps))
        if _pair_label(per_frame, members) in cfg.cue_class_ids:
            cue_pairs.append(members)
    cue = n_pairs > 0 and 100.0 * len(cue_pairs) / n_pairs >= cfg.cue_threshold_pct
    fs = 0
    if cue and cue_pairs:
        rows = [f for members in cue_pairs for f in members]
        fs = int(np.count_nonzero(np.asarray(fsd.classify(window.embeddings[rows])) == 1))
    return _Rec(window.rec_ts, cue, fs)


def brute_force_oracle(trace: Trace, fsd: FsDetector, cfg: DetectorConfig) -> list[Interaction]:
    """Detections for ``trace`` derived from completed cue-positive runs."""
    validate_trace(trace, cfg)
    # timeline of recordings and removals; re-wear events need no handling
    timeline: list[tuple[str, float, _Rec | None]] = []
    worn = True
    for ev in trace.events:
        if isinstance(ev, RecordingEvent):
            timeline.append(("rec", ev.ts, _label_recording(ev.window, fsd, cfg)))
        elif isinstance(ev, WearEvent):
            if not ev.worn and worn:
                timeline.append(("off", ev.ts, None))
            worn = ev.worn

    def q_fs(fs_frames: int, n_recordings: int) -> float:
        return 100.0 * (fs_frames * cfg.frame_len_s) / (n_recordings * cfg.record_len_s)

    out: list[Interaction] = []
    i = 0
    while i < len(timeline):
        kind, _, rec = timeline[i]
        if kind != "rec" or not rec.cue:
            i += 1
            continue
        j = i
        while j < len(timeline) and timeline[j][0] == "rec" and timeline[j][2].cue:
            j += 1
        run = [timeline[k][2] for k in range(i, j)]
        start = run[0].ts
        fs_total = sum(r.fs_frames for r in run)
        if j == len(timeline):
            break  # still open at the end of the trace
        closer_kind, closer_ts, _ = timeline[j]
        if closer_kind == "rec":
            pct = q_fs(fs_total, len(run) + 1)  # the dropout recording also counts
            if pct >= cfg.fs_threshold_pct:
                out.append(Interaction(start, closer_ts - cfg.interval_s + cfg.record_len_s, pct, "cue_dropout"))
        else:
            pct = q_fs(fs_total, len(run))
            if pct >= cfg.fs_threshold_pct:
                whole_cycles = math.floor((closer_ts - start) / cfg.interval_s)
                out.append(Interaction(start, start + whole_cycles * cfg.interval_s + cfg.record_len_s, pct, "off_body"))
        i = j + 1
    return out
