"""Synthetic session traces from scenario descriptions.

Recordings follow the duty cycle: after the watch goes on, wait
``interval_s``, record ``record_len_s``, repeat. Each frame pair gets a
dominant class that is a cue with probability equal to the cue density of the
interval covering the recording start; each cue-pair frame gets an embedding
that the reference detector classifies as foreground speech with probability
equal to the FS density.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..config import DetectorConfig, validate_config
from ..fsd import LinearFsModel
from ..types import GroundTruthInterval, RecordingWindow
from .trace import GroundTruthEvent, RecordingEvent, Trace, TraceMetadata, WearEvent

REFERENCE_MODEL_SEED = 20250917
_DISTRACTORS = 2


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioInterval:
    start: float
    end: float
    cue_density: float = 1.0
    fs_density: float = 1.0
    kind: str = "in_person"


@dataclass(frozen=True)
class ScenarioSpec:
    """What happens during one simulated session.

    ``removals`` lists ``(off_ts, on_ts)`` periods when the watch is off the
    wrist; ``on_ts`` may be None for a removal that lasts to session end.
    Outside all intervals, pairs are cues with ``background_cue_density`` and
    cue frames are FS with ``background_fs_density``.
    """

    session_length_s: float
    intervals: tuple[ScenarioInterval, ...] = ()
    removals: tuple[tuple[float, float | None], ...] = ()
    background_cue_density: float = 0.0
    background_fs_density: float = 0.0
    participant_id: str = "P0"
    session_id: str | None = None
    session_epoch_wallclock: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", tuple(self.intervals))
        object.__setattr__(self, "removals", tuple(tuple(r) for r in self.removals))
        self.validate()

    def validate(self) -> None:
        if not self.session_length_s > 0:
            raise ScenarioError("session_length_s must be positive")
        for name in ("background_cue_density", "background_fs_density"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ScenarioError(f"{name} must lie in [0, 1]")
        for i, iv in enumerate(self.intervals):
            if not 0.0 <= iv.cue_density <= 1.0:
                raise ScenarioError(f"intervals[{i}].cue_density must lie in [0, 1]")
            if not 0.0 <= iv.fs_density <= 1.0:
                raise ScenarioError(f"intervals[{i}].fs_density must lie in [0, 1]")
            if not iv.end > iv.start >= 0:
                raise ScenarioError(f"intervals[{i}] needs 0 <= start < end")
            if iv.kind not in ("in_person", "virtual"):
                raise ScenarioError(f"intervals[{i}].kind must be in_person or virtual")
        prev = -1.0
        for i, (off, on) in enumerate(self.removals):
            if off <= prev or (on is not None and on <= off):
                raise ScenarioError(f"removals[{i}] must be ordered, non-overlapping (off, on) periods")
            prev = off if on is None else on
            if on is None and i != len(self.removals) - 1:
                raise ScenarioError(f"removals[{i}] has no re-wear time but is not the last removal")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        known = {
            "session_length_s", "intervals", "removals", "background_cue_density",
            "background_fs_density", "participant_id", "session_id", "session_epoch_wallclock",
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ScenarioError(f"unknown scenario field(s): {', '.join(unknown)}")
        if "session_length_s" not in data:
            raise ScenarioError("missing field: session_length_s")
        intervals = []
        for i, iv in enumerate(data.get("intervals", [])):
            try:
                intervals.append(ScenarioInterval(**iv))
            except TypeError as exc:
                raise ScenarioError(f"intervals[{i}]: {exc}") from None
        removals = []
        for i, r in enumerate(data.get("removals", [])):
            if isinstance(r, dict):
                r = (r.get("off"), r.get("on"))
            if len(r) != 2 or r[0] is None:
                raise ScenarioError(f"removals[{i}] must be an (off, on) pair")
            removals.append((float(r[0]), None if r[1] is None else float(r[1])))
        kwargs = {k: v for k, v in data.items() if k not in ("intervals", "removals")}
        return cls(intervals=tuple(intervals), removals=tuple(removals), **kwargs)

    def to_dict(self) -> dict:
        return {
            "session_length_s": self.session_length_s,
            "intervals": [asdict(iv) for iv in self.intervals],
            "removals": [list(r) for r in self.removals],
            "background_cue_density": self.background_cue_density,
            "background_fs_density": self.background_fs_density,
            "participant_id": self.participant_id,
            "session_id": self.session_id,
            "session_epoch_wallclock": self.session_epoch_wallclock,
        }


def load_scenario(path: str | Path) -> ScenarioSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON (line {exc.lineno}): {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    return ScenarioSpec.from_dict(data)


def reference_model(cfg: DetectorConfig) -> LinearFsModel:
    """Fixed linear detector whose weight direction synthetic embeddings are built around."""
    rng = np.random.default_rng(REFERENCE_MODEL_SEED + cfg.embedding_dim)
    w = rng.normal(size=cfg.embedding_dim)
    return LinearFsModel(w / np.linalg.norm(w), 0.0, 0.5)


def duty_cycle_schedule(spec: ScenarioSpec, cfg: DetectorConfig) -> list[float]:
    """Recording start times: wait, record, repeat, restarting on re-wear.

    A recording is kept only if it completes before the next removal and
    before the session ends.
    """
    worn_periods = []
    on = 0.0
    for off, next_on in spec.removals:
        worn_periods.append((on, min(off, spec.session_length_s)))
        if next_on is None:
            on = None
            break
        on = next_on
    if on is not None:
        worn_periods.append((on, spec.session_length_s))
    times = []
    for on, off in worn_periods:
        k = 0
        while True:
            t = on + cfg.interval_s + k * cfg.period_s
            if t + cfg.record_len_s > off:
                break
            times.append(t)
            k += 1
    return times


def _densities(spec: ScenarioSpec, t: float) -> tuple[float, float]:
    for iv in spec.intervals:
        if iv.start <= t < iv.end:
            return iv.cue_density, iv.fs_density
    return spec.background_cue_density, spec.background_fs_density


def _skip(x: np.ndarray, excluded: np.ndarray) -> np.ndarray:
    """Map draws from ``[0, C - k)`` onto ``[0, C)`` minus the k sorted ``excluded`` ids."""
    for col in range(excluded.shape[-1]):
        x = x + (x >= excluded[..., col])
    return x


def _synth_windows(
    times: list[float],
    densities: np.ndarray,
    cfg: DetectorConfig,
    model: LinearFsModel,
    rng: np.random.Generator,
) -> list[RecordingWindow]:
    """Draw all recordings of a session at once; ``densities`` is (R, 2) cue/FS."""
    R = len(times)
    if R == 0:
        return []
    C, ps, D = cfg.num_classes, cfg.pair_size, cfg.embedding_dim
    n = cfg.frames_per_recording
    n_pairs = n // ps
    n_tail = n - n_pairs * ps
    cues = np.array(sorted(cfg.cue_class_ids), dtype=np.intp)
    non_cues = np.setdiff1d(np.arange(C), cues)

    is_cue = rng.random((R, n_pairs)) < densities[:, :1]
    if len(non_cues) == 0:
        is_cue[:] = True
    cue_pick = cues[rng.integers(0, len(cues), (R, n_pairs))]
    other_pick = non_cues[rng.integers(0, max(len(non_cues), 1), (R, n_pairs))] if len(non_cues) else cue_pick
    dominant = np.where(is_cue, cue_pick, other_pick)
    frame_dom = np.concatenate([np.repeat(dominant, ps, axis=1), rng.integers(0, C, (R, n_tail))], axis=1)
    frame_cue = np.concatenate([np.repeat(is_cue, ps, axis=1), np.zeros((R, n_tail), dtype=bool)], axis=1)

    # each frame: one dominant class plus _DISTRACTORS distinct weaker classes
    classes = [frame_dom]
    for k in range(_DISTRACTORS):
        taken = np.sort(np.stack(classes, axis=-1), axis=-1)
        classes.append(_skip(rng.integers(0, C - len(classes), (R, n)), taken))
    cls = np.stack(classes, axis=-1)
    vals = np.concatenate(
        [rng.uniform(0.5, 0.95, (R, n, 1)), rng.uniform(0.0, 0.3, (R, n, _DISTRACTORS))], axis=-1
    )
    k = 1 + _DISTRACTORS
    score_frame = np.repeat(np.arange(n), k)

    w = model.weights
    direction = w / np.linalg.norm(w)
    offset = -model.bias / np.linalg.norm(w)  # shifts the decision boundary to the origin
    fs = frame_cue & (rng.random((R, n)) < densities[:, 1:])
    sign = np.where(fs, 1.0, -1.0)
    mag = rng.uniform(0.5, 2.0, (R, n))
    noise = rng.normal(0.0, 0.5, (R, n, D))
    noise -= (noise @ direction)[..., None] * direction
    emb = noise + (offset + sign * mag)[..., None] * direction

    cls = cls.reshape(R, n * k)
    vals = vals.reshape(R, n * k)
    return [
        RecordingWindow._trusted(t, emb[r], score_frame, cls[r], vals[r], C)
        for r, t in enumerate(times)
    ]


def generate_trace(
    spec: ScenarioSpec,
    seed: int,
    cfg: DetectorConfig | None = None,
    model: LinearFsModel | None = None,
) -> Trace:
    """Build a reproducible trace for ``spec``; same inputs give identical traces."""
    cfg = validate_config(cfg or DetectorConfig())
    spec.validate()
    model = model or reference_model(cfg)
    if model.embedding_dim != cfg.embedding_dim:
        raise ValueError("model embedding_dim does not match config")
    rng = np.random.default_rng(seed)

    # (ts, order, event); order settles same-timestamp ties deterministically
    keyed = [(0.0, 1, WearEvent(0.0, True))]
    for iv in spec.intervals:
        keyed.append((iv.start, 0, GroundTruthEvent(GroundTruthInterval(iv.start, iv.end, iv.kind))))
    for off, on in spec.removals:
        if off < spec.session_length_s:
            keyed.append((off, 3, WearEvent(off, False)))
        if on is not None and on < spec.session_length_s:
            keyed.append((on, 1, WearEvent(on, True)))
    times = duty_cycle_schedule(spec, cfg)
    densities = np.array([_densities(spec, t) for t in times]).reshape(len(times), 2)
    for t, window in zip(times, _synth_windows(times, densities, cfg, model, rng)):
        keyed.append((t, 2, RecordingEvent(window)))
    if not spec.removals or spec.removals[-1][1] is not None:
        # session ends with the watch coming off
        keyed.append((spec.session_length_s, 3, WearEvent(spec.session_length_s, False)))
    keyed.sort(key=lambda k: (k[0], k[1]))
    metadata = TraceMetadata(
        participant_id=spec.participant_id,
        session_id=spec.session_id,
        session_epoch_wallclock=spec.session_epoch_wallclock,
        config=cfg.to_dict(),
        seed=int(seed),
    )
    return Trace(metadata, [ev for _, _, ev in keyed])


def random_scenario(
    rng: np.random.Generator,
    session_length_s: float = 4 * 3600.0,
    cue_densities=(0.0, 0.25, 0.5, 0.75, 1.0),
    fs_densities=(0.0, 0.1, 0.15, 0.5, 1.0),
    max_intervals: int = 6,
    removal_prob: float = 0.5,
    participant_id: str = "P0",
) -> ScenarioSpec:
    """Draw a scenario with random intervals, densities and removal periods."""
    n = int(rng.integers(0, max_intervals + 1))
    starts = np.sort(rng.uniform(0, session_length_s, n))
    intervals = []
    for s in starts:
        length = float(rng.uniform(30.0, 1800.0))
        intervals.append(
            ScenarioInterval(
                start=float(s),
                end=float(s) + length,
                cue_density=float(rng.choice(cue_densities)),
                fs_density=float(rng.choice(fs_densities)),
                kind=str(rng.choice(["in_person", "virtual"])),
            )
        )
    removals = []
    t = 0.0
    while rng.random() < removal_prob:
        off = t + float(rng.uniform(60.0, session_length_s / 2))
        if off >= session_length_s:
            break
        on = off + float(rng.uniform(1.0, 1800.0))
        removals.append((off, on if on < session_length_s else None))
        if on >= session_length_s:
            break
        t = on
    return ScenarioSpec(
        session_length_s=session_length_s,
        intervals=tuple(intervals),
        removals=tuple(removals),
        background_cue_density=float(rng.choice(cue_densities)) * float(rng.random() < 0.3),
        background_fs_density=float(rng.choice(fs_densities)),
        participant_id=participant_id,
    )
