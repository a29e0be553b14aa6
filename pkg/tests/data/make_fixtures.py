"""Regenerate the committed CLI fixtures.

The golden detection log is produced by the batch oracle, not by the
streaming replay it is later compared against.

    python tests/data/make_fixtures.py
"""

from pathlib import Path

from convodetect.config import DetectorConfig, dump_config
from convodetect.sim.generate import ScenarioInterval, ScenarioSpec, generate_trace, reference_model
from convodetect.sim.oracle import brute_force_oracle
from convodetect.sim.replay import write_detection_log
from convodetect.sim.trace import save_trace

HERE = Path(__file__).parent
CFG = DetectorConfig(embedding_dim=8)
SCENARIO = ScenarioSpec(
    session_length_s=3 * 3600.0,
    intervals=(
        ScenarioInterval(600.0, 1500.0, 1.0, 1.0, "in_person"),
        ScenarioInterval(2400.0, 3000.0, 0.75, 0.5, "virtual"),
        ScenarioInterval(4200.0, 4900.0, 1.0, 0.1, "in_person"),
        ScenarioInterval(6500.0, 7400.0, 1.0, 1.0, "in_person"),
    ),
    removals=((7000.0, 7600.0),),
    participant_id="P7",
    session_id="P7-day1",
    session_epoch_wallclock="2025-03-04T08:00:00-05:00",
)
SEED = 11


def main():
    model = reference_model(CFG)
    trace = generate_trace(SCENARIO, SEED, CFG)
    (HERE / "fixture_config.ini").write_text(dump_config(CFG))
    model.save(HERE / "fixture_model.json")
    save_trace(trace, HERE / "fixture_trace.jsonl")
    golden = brute_force_oracle(trace, model, CFG)
    write_detection_log(HERE / "fixture_golden.jsonl", trace.metadata.sid, golden, trace.metadata.participant_id)
    print(f"{len(trace.recordings)} recordings, {len(golden)} golden detections")


if __name__ == "__main__":
    main()
