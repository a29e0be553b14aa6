"""Simulate a few participant-days, replay them and print the report.

Every participant has a handful of conversations, one long stretch of
television (plenty of cue classes, very little wearer speech) and a lunch
break with the device off. Feedback is simulated as "yes" when a detection
overlaps a true conversation. The batch oracle double-checks every replay.

The generator lists the television stretch as a ground-truth interval too,
so the one interval each participant "misses" in the recall column is the
television being correctly ignored. Conversations at cue density 0.75 can
break into more than one detection when a single recording drops below the
cue gate.
"""

import numpy as np

from convodetect import DetectorConfig
from convodetect.report import build_report, format_text
from convodetect.sim.generate import ScenarioInterval, ScenarioSpec, generate_trace, reference_model
from convodetect.sim.metrics import auto_feedback
from convodetect.sim.oracle import brute_force_oracle
from convodetect.sim.replay import DetectionRecord, replay

cfg = DetectorConfig(embedding_dim=16)
model = reference_model(cfg)
rng = np.random.default_rng(4)

records, feedback, truth = [], [], {}
for p in range(5):
    talks = []
    t = float(rng.uniform(600, 1800))
    while t < 9 * 3600:
        length = float(rng.uniform(120, 1500))
        talks.append(ScenarioInterval(t, t + length, float(rng.choice([0.75, 1.0])), float(rng.uniform(0.3, 1.0))))
        t += length + float(rng.uniform(1800, 5400))
    tv_start = float(rng.uniform(0, 9 * 3600))
    tv = ScenarioInterval(tv_start, tv_start + 2400, cue_density=1.0, fs_density=0.03)
    spec = ScenarioSpec(
        session_length_s=10 * 3600.0,
        intervals=tuple(talks) + (tv,),
        removals=((4 * 3600.0, 4.75 * 3600.0),),
        participant_id=f"P{p + 1}",
    )
    trace = generate_trace(spec, seed=p, cfg=cfg, model=model)
    detections, metrics = replay(trace, model, cfg)
    assert detections == brute_force_oracle(trace, model, cfg)
    sid = trace.metadata.sid
    records += [DetectionRecord(sid, d, trace.metadata.participant_id) for d in detections]
    feedback += [(sid, i, lab) for i, lab in auto_feedback(detections, trace.ground_truth)]
    truth[sid] = trace.ground_truth
    recall = "n/a" if metrics.recall is None else f"{metrics.recall:.2f}"
    print(f"{sid}: {len(trace.recordings)} recordings, {len(detections)} detections, recall {recall}")

print()
print(format_text(build_report(records, feedback, truth)))
