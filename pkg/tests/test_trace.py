import json

import numpy as np
import pytest

from convodetect import DetectorConfig
from convodetect.sim.generate import ScenarioInterval, ScenarioSpec, generate_trace
from convodetect.sim.trace import (
    FeedbackEvent,
    Trace,
    TraceError,
    TraceMetadata,
    WearEvent,
    dumps_trace,
    load_trace,
    loads_trace,
    save_trace,
    validate_trace,
)


@pytest.fixture
def trace(small_cfg):
    spec = ScenarioSpec(2000.0, (ScenarioInterval(300.0, 900.0),), removals=((1200.0, 1300.0),))
    return generate_trace(spec, 4, small_cfg)


def test_roundtrip_is_lossless(tmp_path, trace, small_cfg):
    path = tmp_path / "t.jsonl"
    save_trace(trace, path)
    back = load_trace(path)
    assert back.metadata.to_dict() == trace.metadata.to_dict()
    assert len(back.events) == len(trace.events)
    for a, b in zip(trace.recordings, back.recordings):
        assert a.rec_ts == b.rec_ts
        np.testing.assert_array_equal(a.embeddings, b.embeddings)
        np.testing.assert_array_equal(a.dense_scores(), b.dense_scores())
    assert dumps_trace(back) == dumps_trace(trace)
    validate_trace(back, small_cfg)


def test_header_carries_metadata(trace):
    header = json.loads(dumps_trace(trace).splitlines()[0])
    assert header["type"] == "header"
    assert header["schema"] == "convodetect-trace/1"
    md = header["metadata"]
    assert set(md) == {"participant_id", "session_id", "session_epoch_wallclock", "config", "cue_set", "seed"}
    assert md["cue_set"] == sorted(DetectorConfig().cue_class_ids)


def test_event_records_are_tagged(trace):
    for line in dumps_trace(trace).splitlines()[1:]:
        rec = json.loads(line)
        assert set(rec) == {"type", "ts", "payload"}
        assert rec["type"] in {"wear", "recording", "ground_truth", "feedback"}


def _lines(trace):
    return dumps_trace(trace).splitlines()


def test_unknown_event_type_rejected(trace):
    lines = _lines(trace)
    lines.insert(3, json.dumps({"type": "battery", "ts": 5.0, "payload": {}}))
    with pytest.raises(TraceError, match="line 4.*event 2.*unknown event type"):
        loads_trace("\n".join(lines))


def test_wrong_schema_rejected(trace):
    lines = _lines(trace)
    header = json.loads(lines[0])
    header["schema"] = "convodetect-trace/0"
    lines[0] = json.dumps(header)
    with pytest.raises(TraceError, match="unsupported schema"):
        loads_trace("\n".join(lines))


def test_bad_json_reports_line(trace):
    lines = _lines(trace)
    lines[5] = "{not json"
    with pytest.raises(TraceError, match="line 6"):
        loads_trace("\n".join(lines))


def test_extra_field_rejected(trace):
    lines = _lines(trace)
    rec = json.loads(lines[1])
    rec["extra"] = 1
    lines[1] = json.dumps(rec)
    with pytest.raises(TraceError, match="exactly type, ts, payload"):
        loads_trace("\n".join(lines))


def test_first_event_must_be_wear_on():
    t = Trace(TraceMetadata(), [WearEvent(0.0, False)])
    with pytest.raises(TraceError, match="event 0"):
        validate_trace(t)


def test_out_of_order_events_rejected():
    t = Trace(TraceMetadata(), [WearEvent(10.0, True), WearEvent(5.0, False)])
    with pytest.raises(TraceError, match="event 1.*precedes"):
        validate_trace(t)


def test_recording_while_removed_rejected(trace):
    events = [e for e in trace.events]
    rec = trace.events[2]
    bad = Trace(trace.metadata, [WearEvent(0.0, True), WearEvent(1.0, False), rec])
    with pytest.raises(TraceError, match="event 2.*not worn"):
        validate_trace(bad)
    assert events  # untouched


def test_bad_feedback_label():
    t = Trace(TraceMetadata(), [WearEvent(0.0, True), FeedbackEvent(3.0, 0, "perhaps")])
    with pytest.raises(TraceError, match="feedback label"):
        validate_trace(t)


def test_config_mismatch(trace):
    with pytest.raises(TraceError, match="config mismatch.*embedding_dim"):
        validate_trace(trace, DetectorConfig())
