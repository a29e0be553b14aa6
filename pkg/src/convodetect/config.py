"""Detector constants and configuration loading.

All timing values are in seconds. Class ids refer to the 521-class
audio-event taxonomy produced by the front-end tagger.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

# Default conversation-cue classes: (class id, display name).
# Speech, Shout, Whispering, Laughter, Crying, Clapping and Chatter are named
# as cues outright; the rest are speech-adjacent classes picked to reach 15.
DEFAULT_CUE_CLASSES: tuple[tuple[int, str], ...] = (
    (0, "Speech"),
    (1, "Child speech, kid speaking"),
    (2, "Conversation"),
    (3, "Narration, monologue"),
    (6, "Shout"),
    (9, "Yell"),
    (10, "Children shouting"),
    (12, "Whispering"),
    (13, "Laughter"),
    (15, "Giggle"),
    (18, "Chuckle, chortle"),
    (19, "Crying, sobbing"),
    (58, "Clapping"),
    (63, "Chatter"),
    (65, "Hubbub, speech noise, speech babble"),
)
DEFAULT_CUE_IDS: frozenset[int] = frozenset(cid for cid, _ in DEFAULT_CUE_CLASSES)


class ConfigError(ValueError):
    """Raised when a configuration violates one of its invariants."""


@dataclass(frozen=True)
class DetectorConfig:
    """Constants of the duty-cycled interaction detector.

    Attributes:
        interval_s: wait between the end of one recording and the next start.
        record_len_s: length of one recording (15 s window plus 1 s padding).
        frame_len_s: duration of one tagger frame.
        pair_size: consecutive frames averaged into one labeling decision.
        num_classes: size of the tagger's class vocabulary.
        embedding_dim: length of each frame embedding.
        cue_class_ids: class ids counted as conversation cues.
        cue_threshold_pct: minimum cue-pair percentage for a cue-positive recording.
        fs_threshold_pct: minimum foreground-speech percentage to report an interaction.
    """

    interval_s: float = 90.0
    record_len_s: float = 16.0
    frame_len_s: float = 0.48
    pair_size: int = 2
    num_classes: int = 521
    embedding_dim: int = 1024
    cue_class_ids: frozenset[int] = field(default=DEFAULT_CUE_IDS)
    cue_threshold_pct: float = 50.0
    fs_threshold_pct: float = 15.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "cue_class_ids", frozenset(int(c) for c in self.cue_class_ids))

    @property
    def period_s(self) -> float:
        """Start-to-start spacing of consecutive recordings while worn."""
        return self.interval_s + self.record_len_s

    @property
    def frames_per_recording(self) -> int:
        return int(math.floor(self.record_len_s / self.frame_len_s + 1e-9))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["cue_class_ids"] = sorted(self.cue_class_ids)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "DetectorConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        return validate_config(cls(**data))


def validate_config(cfg: DetectorConfig) -> DetectorConfig:
    """Return ``cfg`` unchanged if it is consistent, else raise ConfigError.

    The error message names the first violated invariant.
    """
    for name in ("interval_s", "record_len_s", "frame_len_s"):
        value = getattr(cfg, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be positive")
    if cfg.pair_size < 1:
        raise ConfigError("pair_size must be positive")
    if cfg.num_classes < 1:
        raise ConfigError("num_classes must be positive")
    if cfg.embedding_dim < 1:
        raise ConfigError("embedding_dim must be positive")
    if not cfg.record_len_s > cfg.pair_size * cfg.frame_len_s:
        raise ConfigError("record_len_s must exceed pair_size * frame_len_s")
    if not 0 < cfg.cue_threshold_pct <= 100:
        raise ConfigError("cue_threshold_pct must be in (0, 100]")
    if not 0 < cfg.fs_threshold_pct <= 100:
        raise ConfigError("fs_threshold_pct must be in (0, 100]")
    if not cfg.cue_class_ids:
        raise ConfigError("cue_class_ids must be nonempty")
    for cid in sorted(cfg.cue_class_ids):
        if not 0 <= cid < cfg.num_classes:
            raise ConfigError(f"cue id out of range: {cid} (num_classes={cfg.num_classes})")
    return cfg


_INT_KEYS = {"pair_size", "num_classes", "embedding_dim"}
_SECTION = "detector"


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "cue_class_ids":
        parts = [p for p in raw.replace(",", " ").split() if p]
        try:
            return frozenset(int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"cue_class_ids: expected integers, got {raw!r}") from None
    try:
        return int(raw) if key in _INT_KEYS else float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def load_config(path: str | Path) -> DetectorConfig:
    """Load a config from an INI-style ``key = value`` file.

    Keys live under a ``[detector]`` section (a section-less file is also
    accepted). Missing keys take defaults; unknown keys raise ConfigError.
    """
    text = Path(path).read_text()
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case
    if not text.lstrip().startswith("["):
        text = f"[{_SECTION}]\n" + text
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    extra = [s for s in parser.sections() if s != _SECTION]
    if extra:
        raise ConfigError(f"unknown config section(s): {', '.join(extra)}")
    items = dict(parser.items(_SECTION)) if parser.has_section(_SECTION) else {}
    known = {f.name for f in fields(DetectorConfig)}
    unknown = sorted(set(items) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return validate_config(DetectorConfig(**{k: _parse_value(k, v) for k, v in items.items()}))


def dump_config(cfg: DetectorConfig) -> str:
    lines = [f"[{_SECTION}]"]
    for key, value in cfg.to_dict().items():
        if key == "cue_class_ids":
            value = ", ".join(str(c) for c in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: DetectorConfig, **changes) -> DetectorConfig:
    return validate_config(replace(cfg, **changes))
