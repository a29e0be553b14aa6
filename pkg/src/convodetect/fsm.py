"""Duty-cycle interaction state machine.

Each recording is either cue-positive (enough cue pairs) or cue-negative.
A run of cue-positive recordings opens an interaction; it is closed by the
next cue-negative recording or by the watch coming off the wrist, and is
reported only if enough of the recorded audio was foreground speech.

Foreground speech is accumulated in seconds (FS frame count times frame
length), so the gate compares a true percentage of recorded time.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Union

from .config import DetectorConfig
from .frames import RecordingAnalysis, analyze_recording
from .fsd import FsDetector, classify
from .types import Interaction, InteractionState, RecordingWindow, fs_percent

logger = logging.getLogger(__name__)


class TimestampOrderError(ValueError):
    """An event arrived with a timestamp earlier than one already seen."""


@dataclass(frozen=True)
class RecordingDone:
    rec_ts: float
    analysis: RecordingAnalysis


@dataclass(frozen=True)
class WearStatus:
    ts: float
    worn: bool


FsmEvent = Union[RecordingDone, WearStatus]


@dataclass(frozen=True)
class FsmOutput:
    state: InteractionState
    interaction: Interaction | None = None
    # q_fs of an open interaction that was closed without being reported
    discarded_fs_pct: float | None = None


def _check_ts(state: InteractionState, ts: float) -> None:
    if not math.isfinite(ts) or ts < 0:
        raise TimestampOrderError(f"timestamp must be finite and >= 0, got {ts}")
    if state.last_ts is not None and ts < state.last_ts:
        raise TimestampOrderError(f"timestamp {ts} precedes previous event at {state.last_ts}")


def _reset(state: InteractionState, ts: float) -> InteractionState:
    return replace(state, interact_on=False, start_time=None, fs_frames=0, n_recordings=0, last_ts=ts)


def current_fs_pct(state: InteractionState) -> float:
    return fs_percent(state.fs_frames, state.n_recordings, state.frame_len_s, state.record_len_s)


def on_recording(
    state: InteractionState,
    rec_ts: float,
    analysis: RecordingAnalysis,
    fsd: FsDetector,
    cfg: DetectorConfig,
) -> FsmOutput:
    """Advance the machine by one completed recording."""
    _check_ts(state, rec_ts)
    n_rec = state.n_recordings + 1  # every recording counts toward recorded time

    if analysis.cue_pct >= cfg.cue_threshold_pct:
        n_fs = int(classify(fsd, analysis.conv_embeddings).sum())
        fs_frames = state.fs_frames + n_fs
        if state.interact_on:
            new = replace(state, fs_frames=fs_frames, n_recordings=n_rec, last_ts=rec_ts)
        else:
            new = replace(
                state, interact_on=True, start_time=rec_ts, fs_frames=fs_frames, n_recordings=n_rec, last_ts=rec_ts
            )
        return FsmOutput(new)

    q_fs = fs_percent(state.fs_frames, n_rec, cfg.frame_len_s, cfg.record_len_s)
    interaction = None
    discarded = None
    if state.interact_on:
        if q_fs >= cfg.fs_threshold_pct:
            end = rec_ts - cfg.interval_s + cfg.record_len_s
            interaction = Interaction(state.start_time, end, q_fs, "cue_dropout")
        else:
            discarded = q_fs
            logger.debug("discarding interaction from %s: q_fs=%.2f%%", state.start_time, q_fs)
    return FsmOutput(_reset(state, rec_ts), interaction, discarded)


def on_wear_removed(state: InteractionState, current_ts: float, cfg: DetectorConfig) -> FsmOutput:
    """Close any open interaction because the watch was taken off."""
    _check_ts(state, current_ts)
    q_fs = current_fs_pct(state)
    interaction = None
    discarded = None
    if state.interact_on:
        if current_ts < state.start_time:
            raise TimestampOrderError("removal precedes interaction start")
        if q_fs >= cfg.fs_threshold_pct:
            past = math.floor((current_ts - state.start_time) / cfg.interval_s) * cfg.interval_s
            interaction = Interaction(state.start_time, state.start_time + past + cfg.record_len_s, q_fs, "off_body")
        else:
            discarded = q_fs
    return FsmOutput(_reset(state, current_ts), interaction, discarded)


def min_emitted_duration(cfg: DetectorConfig) -> float:
    """Shortest ``end - start`` reachable through a cue dropout.

    One cue-positive recording at t followed by a cue-negative one a period
    later gives ``(t + interval + L - interval + L) - t = 2 L``.
    """
    return 2 * cfg.record_len_s


class InteractionDetector:
    """Streaming wrapper that owns the state for one session.

    Feed it recordings (raw windows or precomputed analyses) and wear events in
    timestamp order; emitted interactions accumulate in ``interactions``.
    """

    def __init__(self, fsd: FsDetector, cfg: DetectorConfig) -> None:
        if fsd.embedding_dim != cfg.embedding_dim:
            raise ValueError(f"detector embedding_dim {fsd.embedding_dim} != config {cfg.embedding_dim}")
        self.fsd = fsd
        self.cfg = cfg
        self.state = InteractionState.initial(cfg)
        self.worn = True
        self.interactions: list[Interaction] = []
        self.discarded: list[tuple[float, float]] = []

    def _apply(self, out: FsmOutput, start: float | None) -> Interaction | None:
        self.state = out.state
        if out.interaction is not None:
            self.interactions.append(out.interaction)
        if out.discarded_fs_pct is not None:
            self.discarded.append((start, out.discarded_fs_pct))
        return out.interaction

    def push_window(self, window: RecordingWindow) -> Interaction | None:
        return self.push_analysis(window.rec_ts, analyze_recording(window, self.cfg))

    def push_analysis(self, rec_ts: float, analysis: RecordingAnalysis) -> Interaction | None:
        if not self.worn:
            raise ValueError(f"recording at {rec_ts} while the device is not worn")
        start = self.state.start_time
        return self._apply(on_recording(self.state, rec_ts, analysis, self.fsd, self.cfg), start)

    def push_wear(self, ts: float, worn: bool) -> Interaction | None:
        if worn:
            _check_ts(self.state, ts)
            self.worn = True
            self.state = replace(self.state, last_ts=ts)
            return None
        if not self.worn:
            # already off; nothing open to close
            _check_ts(self.state, ts)
            self.state = replace(self.state, last_ts=ts)
            return None
        self.worn = False
        start = self.state.start_time
        return self._apply(on_wear_removed(self.state, ts, self.cfg), start)

    def push(self, event: FsmEvent) -> Interaction | None:
        if isinstance(event, RecordingDone):
            return self.push_analysis(event.rec_ts, event.analysis)
        if isinstance(event, WearStatus):
            return self.push_wear(event.ts, event.worn)
        raise TypeError(f"unsupported event {event!r}")
