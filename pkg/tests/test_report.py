import statistics

import pytest

from convodetect.report import build_report, report_tables, write_report
from convodetect.sim.replay import DetectionRecord
from convodetect.types import GroundTruthInterval, Interaction

# (yes, total) per participant
COUNTS = {
    "P1": (1, 4), "P2": (3, 4), "P3": (5, 8), "P4": (1, 2), "P5": (4, 5), "P6": (3, 5),
    "P7": (2, 2), "P8": (7, 10), "P9": (9, 10), "P10": (1, 1), "P11": (3, 4),
}


def _inputs():
    detections, feedback = [], []
    for pid, (yes, total) in COUNTS.items():
        sid = f"{pid}-s1"
        for i in range(total):
            detections.append(DetectionRecord(sid, Interaction(1000.0 * i, 1000.0 * i + 50.0, 40.0), pid))
            feedback.append((sid, i, "yes" if i < yes else "no"))
    return detections, feedback


def test_participant_mean_and_sd():
    bundle = build_report(*_inputs())
    pcts = [100.0 * y / n for y, n in COUNTS.values()]
    assert bundle.participant_mean_accuracy_pct == pytest.approx(statistics.fmean(pcts), abs=0.01)
    assert bundle.participant_mean_accuracy_pct == pytest.approx(71.59, abs=0.01)
    assert bundle.participant_sd_accuracy_pct == pytest.approx(statistics.stdev(pcts), abs=0.01)
    assert bundle.participant_sd_accuracy_pct == pytest.approx(22.14, abs=0.01)


def test_aggregate_pools_labels():
    bundle = build_report(*_inputs())
    assert (bundle.n_yes, bundle.n_feedback) == (39, 55)
    assert bundle.aggregate_accuracy_pct == pytest.approx(100 * 39 / 55)


def test_no_feedback_omits_accuracy():
    detections, _ = _inputs()
    bundle = build_report(detections, [])
    tables = report_tables(bundle)
    assert "accuracy" not in tables["participants.csv"]
    assert "accuracy" not in tables["summary.csv"]
    assert bundle.aggregate_accuracy_pct is None


def test_boundary_table_needs_truth(tmp_path):
    det = [DetectionRecord("s", Interaction(1000.0, 1032.0, 20.0))]
    bundle = build_report(det, [("s", 0, "yes")], {"s": [GroundTruthInterval(995.0, 1040.0)]})
    assert bundle.boundary_deltas[0]["start_delta_s"] == 5.0
    assert bundle.boundary_deltas[0]["end_delta_s"] == -8.0
    names = {p.name for p in write_report(bundle, tmp_path)}
    assert names == {"summary.csv", "participants.csv", "fs_pct_by_outcome.csv", "boundary_deltas.csv", "report.txt"}
    assert "boundary_deltas.csv" not in report_tables(build_report(det, []))


def test_feedback_for_unknown_session_ignored():
    det = [DetectionRecord("s", Interaction(0.0, 32.0, 20.0))]
    bundle = build_report(det, [("other", 0, "yes"), ("s", 0, "no")])
    assert bundle.n_feedback == 1 and bundle.aggregate_accuracy_pct == 0.0
