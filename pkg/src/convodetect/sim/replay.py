"""Replay a trace through the streaming detector under a virtual clock."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..config import DetectorConfig
from ..fsd import FsDetector
from ..fsm import InteractionDetector
from ..types import Interaction
from .metrics import SessionMetrics, compute_metrics
from .trace import FeedbackEvent, GroundTruthEvent, RecordingEvent, Trace, TraceError, WearEvent, validate_trace


class VirtualClock:
    """Simulation time that only moves when an event is applied."""

    def __init__(self, start: float = 0.0) -> None:
        self.now = start

    def advance_to(self, ts: float) -> None:
        if ts < self.now:
            raise ValueError(f"clock cannot move backwards from {self.now} to {ts}")
        self.now = ts


def replay(trace: Trace, fsd: FsDetector, cfg: DetectorConfig) -> tuple[list[Interaction], SessionMetrics]:
    """Run every event of ``trace`` through the streaming detector, in order."""
    validate_trace(trace, cfg)
    detector = InteractionDetector(fsd, cfg)
    clock = VirtualClock()
    for i, ev in enumerate(trace.events):
        clock.advance_to(ev.ts)
        try:
            if isinstance(ev, RecordingEvent):
                detector.push_window(ev.window)
            elif isinstance(ev, WearEvent):
                detector.push_wear(ev.ts, ev.worn)
            elif not isinstance(ev, (GroundTruthEvent, FeedbackEvent)):
                raise TraceError(f"unknown event {ev!r}", index=i)
        except TraceError:
            raise
        except ValueError as exc:
            raise TraceError(str(exc), index=i) from None
    detections = list(detector.interactions)
    return detections, compute_metrics(detections, trace)


# --- detection log -----------------------------------------------------------

DETECTION_FIELDS = ("session_id", "start", "end", "fs_pct_at_close", "close_reason")


@dataclass(frozen=True)
class DetectionRecord:
    session_id: str
    interaction: Interaction
    participant_id: str | None = None

    def to_dict(self) -> dict:
        d = {
            "session_id": self.session_id,
            "start": self.interaction.start,
            "end": self.interaction.end,
            "fs_pct_at_close": self.interaction.fs_pct_at_close,
            "close_reason": self.interaction.close_reason,
        }
        if self.participant_id is not None and self.participant_id != self.session_id:
            d["participant_id"] = self.participant_id
        return d


def detection_log_lines(session_id: str, detections: Iterable[Interaction], participant_id: str | None = None) -> list[str]:
    return [json.dumps(DetectionRecord(session_id, d, participant_id).to_dict()) for d in detections]


def write_detection_log(path: str | Path, session_id: str, detections: Iterable[Interaction], participant_id: str | None = None) -> None:
    lines = detection_log_lines(session_id, detections, participant_id)
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_detection_log(path: str | Path) -> list[DetectionRecord]:
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                extra = set(rec) - set(DETECTION_FIELDS) - {"participant_id"}
                if extra:
                    raise ValueError(f"unknown field(s) {sorted(extra)}")
                inter = Interaction(float(rec["start"]), float(rec["end"]), float(rec["fs_pct_at_close"]), rec["close_reason"])
                out.append(DetectionRecord(str(rec["session_id"]), inter, rec.get("participant_id")))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TraceError(f"{path}: bad detection record: {exc}", line=lineno) from None
    return out


# --- feedback log ------------------------------------------------------------


def feedback_log_lines(session_id: str, feedback: Sequence[tuple[int, str]]) -> list[str]:
    return [json.dumps({"session_id": session_id, "interaction_index": i, "label": lab}) for i, lab in feedback]


def read_feedback_log(path: str | Path) -> list[tuple[str, int, str]]:
    out = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
                label = rec["label"]
                if label not in ("yes", "no", "maybe"):
                    raise ValueError(f"label {label!r} not in yes/no/maybe")
                out.append((str(rec["session_id"]), int(rec["interaction_index"]), label))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TraceError(f"{path}: bad feedback record: {exc}", line=lineno) from None
    return out
