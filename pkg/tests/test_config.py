import pytest
from hypothesis import given, strategies as st

from convodetect.config import (
    DEFAULT_CUE_CLASSES,
    ConfigError,
    DetectorConfig,
    dump_config,
    load_config,
    validate_config,
)


def test_defaults_are_valid():
    cfg = DetectorConfig()
    assert validate_config(cfg) is cfg
    assert (cfg.interval_s, cfg.record_len_s, cfg.frame_len_s) == (90.0, 16.0, 0.48)
    assert (cfg.pair_size, cfg.num_classes, cfg.embedding_dim) == (2, 521, 1024)
    assert len(cfg.cue_class_ids) == 15
    assert (cfg.cue_threshold_pct, cfg.fs_threshold_pct) == (50.0, 15.0)


def test_interval_is_one_and_a_half_minutes():
    assert DetectorConfig().interval_s == 1.5 * 60


def test_full_recording_holds_33_frames():
    assert DetectorConfig().frames_per_recording == 33


def test_default_cues_include_named_classes():
    names = {name for _, name in DEFAULT_CUE_CLASSES}
    for required in ("Speech", "Shout", "Whispering", "Laughter", "Crying, sobbing", "Clapping", "Chatter"):
        assert required in names


def test_zero_record_len_rejected():
    with pytest.raises(ConfigError, match="record_len_s must be positive"):
        validate_config(DetectorConfig(record_len_s=0))


def test_cue_id_out_of_range():
    with pytest.raises(ConfigError, match="cue id out of range"):
        validate_config(DetectorConfig(cue_class_ids={521}, num_classes=521))


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"interval_s": -1}, "interval_s"),
        ({"frame_len_s": 0}, "frame_len_s"),
        ({"record_len_s": 0.9, "frame_len_s": 0.48}, "pair_size"),
        ({"cue_threshold_pct": 0}, "cue_threshold_pct"),
        ({"fs_threshold_pct": 100.5}, "fs_threshold_pct"),
        ({"cue_class_ids": frozenset()}, "nonempty"),
    ],
)
def test_invariant_violations(changes, message):
    with pytest.raises(ConfigError, match=message):
        validate_config(DetectorConfig(**changes))


@given(
    interval=st.floats(-10, 200),
    rec=st.floats(-1, 30),
    cue=st.floats(-5, 120),
    fs=st.floats(-5, 120),
)
def test_validation_is_idempotent(interval, rec, cue, fs):
    cfg = DetectorConfig(interval_s=interval, record_len_s=rec, cue_threshold_pct=cue, fs_threshold_pct=fs)
    try:
        once = validate_config(cfg)
    except ConfigError:
        with pytest.raises(ConfigError):
            validate_config(cfg)
        return
    assert validate_config(once) == once


def test_file_roundtrip(tmp_path):
    cfg = DetectorConfig(embedding_dim=8, cue_class_ids={0, 12, 13}, fs_threshold_pct=20.0)
    path = tmp_path / "c.ini"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


def test_file_missing_keys_take_defaults(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("interval_s = 60\n")
    cfg = load_config(path)
    assert cfg.interval_s == 60.0
    assert cfg.record_len_s == 16.0
    assert cfg.cue_class_ids == DetectorConfig().cue_class_ids


def test_file_unknown_key_is_error(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[detector]\nwindow_len = 3\n")
    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(path)


def test_file_invalid_value_is_error(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text("[detector]\ncue_class_ids = 0, 600\n")
    with pytest.raises(ConfigError, match="cue id out of range"):
        load_config(path)
