"""Step the interaction state machine through a short morning.

Each line is one duty cycle. Watch the interaction open on the first
cue-positive recording, accumulate foreground speech, and close either when
cues stop or when the device comes off.
"""

import numpy as np

from convodetect import DetectorConfig, LinearFsModel, RecordingAnalysis
from convodetect.fsm import InteractionDetector, current_fs_pct

DIM = 4
cfg = DetectorConfig(embedding_dim=DIM)
# speech detector that fires on a positive first embedding coordinate
fsd = LinearFsModel(np.eye(DIM)[0])


def recording(cue_pairs, fs_frames):
    emb = -np.ones((2 * cue_pairs, DIM))
    emb[:fs_frames, 0] = 1.0
    return RecordingAnalysis.from_counts(16, cue_pairs, emb)


det = InteractionDetector(fsd, cfg)
det.push_wear(0.0, True)
plan = [(0, 0), (12, 20), (16, 30), (10, 8), (2, 0), (0, 0), (16, 32), (16, 32)]
ts = 0.0
for cue, fs in plan:
    ts += cfg.period_s
    emitted = det.push_analysis(ts, recording(cue, fs))
    s = det.state
    line = f"t={ts:6.0f}  cue pairs {cue:2d}/16  "
    line += f"open since {s.start_time:g}, fs {current_fs_pct(s):5.1f}%" if s.interact_on else "idle"
    if emitted:
        i = emitted
        line += f"  -> emitted {i.start:g}-{i.end:g} ({i.duration_s:g} s, fs {i.fs_pct_at_close:.1f}%)"
    print(line)

i = det.push_wear(ts + 40.0, False)
print(f"t={ts + 40:6.0f}  device removed -> emitted {i.start:g}-{i.end:g} ({i.close_reason})")
print(f"total emitted: {len(det.interactions)}")
