"""Duty-cycled detection of conversations from audio-tagger frame scores.

Recordings of a few seconds are taken on a fixed duty cycle. Each recording is
tagged frame by frame; pairs of frames whose averaged top class is a
conversation cue mark the recording as cue-positive, and a foreground-speech
detector decides how much of the cue audio belongs to the wearer. Runs of
cue-positive recordings with enough foreground speech are reported as
interactions.
"""

from .config import DEFAULT_CUE_CLASSES, ConfigError, DetectorConfig, load_config, validate_config
from .frames import FramePair, RecordingAnalysis, analyze_recording, pair_frames
from .fsd import FsDetector, LinearFsModel, classify, evaluate_balanced_accuracy, train_linear
from .fsm import InteractionDetector, min_emitted_duration, on_recording, on_wear_removed
from .types import FeedbackRecord, FrameAnalysis, Interaction, InteractionState, RecordingWindow

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CUE_CLASSES",
    "ConfigError",
    "DetectorConfig",
    "FeedbackRecord",
    "FrameAnalysis",
    "FramePair",
    "FsDetector",
    "Interaction",
    "InteractionDetector",
    "InteractionState",
    "LinearFsModel",
    "RecordingAnalysis",
    "RecordingWindow",
    "analyze_recording",
    "classify",
    "evaluate_balanced_accuracy",
    "load_config",
    "min_emitted_duration",
    "on_recording",
    "on_wear_removed",
    "pair_frames",
    "train_linear",
    "validate_config",
]
