"""Session traces and their line-delimited JSON file format.

A trace file starts with one header line carrying the metadata, followed by
one event per line::

    {"type": "header", "schema": "convodetect-trace/1", "metadata": {...}}
    {"type": "wear", "ts": 0.0, "payload": {"worn": true}}
    {"type": "ground_truth", "ts": 300.0, "payload": {"start": 300.0, "end": 900.0, "kind": "in_person"}}
    {"type": "recording", "ts": 90.0, "payload": {"frames": [{"scores": [[0, 0.81], [42, 0.1]], "embedding": [...]}, ...]}}
    {"type": "feedback", "ts": 1000.0, "payload": {"interaction_index": 0, "label": "yes"}}

Scores are stored sparsely as ``[class_id, score]`` pairs; absent classes
score 0. Floats are written with ``repr`` precision so a file round-trips
losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

from ..config import ConfigError, DetectorConfig
from ..types import FEEDBACK_LABELS, GroundTruthInterval, RecordingWindow

TRACE_SCHEMA = "convodetect-trace/1"


class TraceError(ValueError):
    """Malformed trace. ``index`` is the event index, ``line`` the file line (1-based)."""

    def __init__(self, message: str, index: int | None = None, line: int | None = None) -> None:
        where = []
        if line is not None:
            where.append(f"line {line}")
        if index is not None:
            where.append(f"event {index}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.index = index
        self.line = line


@dataclass(frozen=True)
class WearEvent:
    ts: float
    worn: bool


@dataclass(frozen=True, eq=False)
class RecordingEvent:
    window: RecordingWindow

    @property
    def ts(self) -> float:
        return self.window.rec_ts


@dataclass(frozen=True)
class GroundTruthEvent:
    interval: GroundTruthInterval

    @property
    def ts(self) -> float:
        return self.interval.start


@dataclass(frozen=True)
class FeedbackEvent:
    ts: float
    interaction_index: int
    label: str


TraceEvent = Union[WearEvent, RecordingEvent, GroundTruthEvent, FeedbackEvent]


@dataclass
class TraceMetadata:
    participant_id: str = "P0"
    session_id: str | None = None
    session_epoch_wallclock: str | None = None
    config: dict = field(default_factory=lambda: DetectorConfig().to_dict())
    seed: int | None = None

    @property
    def cue_set(self) -> list[int]:
        return sorted(self.config.get("cue_class_ids", []))

    @property
    def sid(self) -> str:
        return self.session_id or self.participant_id

    def detector_config(self) -> DetectorConfig:
        return DetectorConfig.from_dict(self.config)

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "session_id": self.sid,
            "session_epoch_wallclock": self.session_epoch_wallclock,
            "config": self.config,
            "cue_set": self.cue_set,
            "seed": self.seed,
        }


@dataclass
class Trace:
    metadata: TraceMetadata
    events: list[TraceEvent]

    @property
    def recordings(self) -> list[RecordingWindow]:
        return [e.window for e in self.events if isinstance(e, RecordingEvent)]

    @property
    def ground_truth(self) -> list[GroundTruthInterval]:
        return [e.interval for e in self.events if isinstance(e, GroundTruthEvent)]

    @property
    def feedback(self) -> list[FeedbackEvent]:
        return [e for e in self.events if isinstance(e, FeedbackEvent)]


def validate_trace(trace: Trace, cfg: DetectorConfig | None = None) -> None:
    """Check ordering and wear consistency; raise TraceError naming the event index.

    When ``cfg`` is given it must equal the trace's config snapshot, and every
    recording must fit it.
    """
    if cfg is not None:
        try:
            snap = trace.metadata.detector_config()
        except (ConfigError, TypeError) as exc:
            raise TraceError(f"invalid config snapshot: {exc}") from None
        if snap != cfg:
            diff = [k for k, v in cfg.to_dict().items() if snap.to_dict()[k] != v]
            raise TraceError(f"config mismatch between trace and detector: {', '.join(diff)}")
    if not trace.events:
        return
    first = trace.events[0]
    if not (isinstance(first, WearEvent) and first.worn):
        raise TraceError("first event must be a wear event with worn=true", index=0)
    worn = True
    last_ts = -np.inf
    for i, ev in enumerate(trace.events):
        ts = ev.ts
        if not np.isfinite(ts) or ts < 0:
            raise TraceError(f"timestamp must be finite and >= 0, got {ts}", index=i)
        if ts < last_ts:
            raise TraceError(f"timestamp {ts} precedes previous event at {last_ts}", index=i)
        last_ts = ts
        if isinstance(ev, WearEvent):
            worn = ev.worn
        elif isinstance(ev, RecordingEvent):
            if not worn:
                raise TraceError("recording while the device is not worn", index=i)
            if cfg is not None:
                try:
                    ev.window.check(cfg)
                except ValueError as exc:
                    raise TraceError(str(exc), index=i) from None
        elif isinstance(ev, FeedbackEvent):
            if ev.label not in FEEDBACK_LABELS:
                raise TraceError(f"feedback label {ev.label!r} not in {FEEDBACK_LABELS}", index=i)
            if ev.interaction_index < 0:
                raise TraceError("negative interaction_index", index=i)
        elif not isinstance(ev, GroundTruthEvent):
            raise TraceError(f"unknown event {ev!r}", index=i)


# --- serialization ---------------------------------------------------------


def _window_payload(w: RecordingWindow) -> dict:
    frames = [{"scores": [], "embedding": w.embeddings[i].tolist()} for i in range(w.n_frames)]
    for fi, ci, v in zip(w.score_frame.tolist(), w.score_class.tolist(), w.score_value.tolist()):
        frames[fi]["scores"].append([ci, v])
    return {"frames": frames}


def event_to_record(ev: TraceEvent) -> dict:
    if isinstance(ev, WearEvent):
        return {"type": "wear", "ts": ev.ts, "payload": {"worn": ev.worn}}
    if isinstance(ev, RecordingEvent):
        return {"type": "recording", "ts": ev.ts, "payload": _window_payload(ev.window)}
    if isinstance(ev, GroundTruthEvent):
        g = ev.interval
        return {"type": "ground_truth", "ts": g.start, "payload": {"start": g.start, "end": g.end, "kind": g.kind}}
    if isinstance(ev, FeedbackEvent):
        return {"type": "feedback", "ts": ev.ts, "payload": {"interaction_index": ev.interaction_index, "label": ev.label}}
    raise TypeError(f"not a trace event: {ev!r}")


def _parse_window(ts: float, payload: dict, num_classes: int, embedding_dim: int) -> RecordingWindow:
    frames = payload["frames"]
    fi, ci, vals = [], [], []
    for i, fr in enumerate(frames):
        for cid, score in fr["scores"]:
            fi.append(i)
            ci.append(int(cid))
            vals.append(float(score))
    emb = np.array([fr["embedding"] for fr in frames], dtype=np.float64)
    if len(frames) == 0:
        emb = emb.reshape(0, embedding_dim)
    return RecordingWindow(ts, emb, np.array(fi, dtype=np.intp), np.array(ci, dtype=np.intp), np.array(vals), num_classes)


def record_to_event(rec: dict, num_classes: int = 521, embedding_dim: int = 1024) -> TraceEvent:
    kind = rec["type"]
    ts = float(rec["ts"])
    payload = rec["payload"]
    if kind == "wear":
        return WearEvent(ts, bool(payload["worn"]))
    if kind == "recording":
        return RecordingEvent(_parse_window(ts, payload, num_classes, embedding_dim))
    if kind == "ground_truth":
        return GroundTruthEvent(GroundTruthInterval(float(payload["start"]), float(payload["end"]), payload["kind"]))
    if kind == "feedback":
        return FeedbackEvent(ts, int(payload["interaction_index"]), payload["label"])
    raise ValueError(f"unknown event type {kind!r}")


def iter_trace_lines(trace: Trace) -> Iterator[str]:
    yield json.dumps({"type": "header", "schema": TRACE_SCHEMA, "metadata": trace.metadata.to_dict()})
    for ev in trace.events:
        yield json.dumps(event_to_record(ev))


def dumps_trace(trace: Trace) -> str:
    return "\n".join(iter_trace_lines(trace)) + "\n"


def save_trace(trace: Trace, path: str | Path) -> None:
    with open(path, "w") as fh:
        for line in iter_trace_lines(trace):
            fh.write(line)
            fh.write("\n")


def parse_trace_lines(lines: Iterable[str]) -> Trace:
    it = iter(enumerate(lines, start=1))
    header = None
    for lineno, raw in it:
        if raw.strip():
            try:
                header = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise TraceError(f"header is not valid JSON: {exc.msg}", line=lineno) from None
            break
    if header is None:
        raise TraceError("empty trace file")
    if header.get("type") != "header":
        raise TraceError("first line must be the header record", line=lineno)
    if header.get("schema") != TRACE_SCHEMA:
        raise TraceError(f"unsupported schema {header.get('schema')!r} (expected {TRACE_SCHEMA})", line=lineno)
    md = header.get("metadata", {})
    known = {"participant_id", "session_id", "session_epoch_wallclock", "config", "cue_set", "seed"}
    unknown = sorted(set(md) - known)
    if unknown:
        raise TraceError(f"unknown metadata field(s): {', '.join(unknown)}", line=lineno)
    metadata = TraceMetadata(
        participant_id=str(md.get("participant_id", "P0")),
        session_id=md.get("session_id"),
        session_epoch_wallclock=md.get("session_epoch_wallclock"),
        config=md.get("config", DetectorConfig().to_dict()),
        seed=md.get("seed"),
    )
    if "cue_set" in md and sorted(md["cue_set"]) != metadata.cue_set:
        raise TraceError("cue_set snapshot disagrees with config.cue_class_ids", line=lineno)
    num_classes = int(metadata.config.get("num_classes", 521))
    embedding_dim = int(metadata.config.get("embedding_dim", 1024))
    events: list[TraceEvent] = []
    for lineno, raw in it:
        if not raw.strip():
            continue
        idx = len(events)
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TraceError(f"invalid JSON: {exc.msg}", index=idx, line=lineno) from None
        if not isinstance(rec, dict) or set(rec) != {"type", "ts", "payload"}:
            raise TraceError("event must be an object with exactly type, ts, payload", index=idx, line=lineno)
        try:
            events.append(record_to_event(rec, num_classes, embedding_dim))
        except (KeyError, TypeError, ValueError) as exc:
            raise TraceError(f"bad {rec.get('type')!r} event: {exc}", index=idx, line=lineno) from None
    return Trace(metadata, events)


def loads_trace(text: str) -> Trace:
    return parse_trace_lines(text.splitlines())


def load_trace(path: str | Path) -> Trace:
    with open(path) as fh:
        return parse_trace_lines(fh)
