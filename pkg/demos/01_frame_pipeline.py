"""Turn one recording's frame scores into a cue decision.

Builds a 33-frame recording by hand where the first ten frames look like
laughter and the rest like music, then shows how frames are paired and what
fraction of the pairs count as conversation cues.
"""

import numpy as np

from convodetect import DetectorConfig, RecordingWindow, analyze_recording, pair_frames
from convodetect.config import DEFAULT_CUE_CLASSES

LAUGHTER, MUSIC = 13, 137

cfg = DetectorConfig(embedding_dim=4)
n = cfg.frames_per_recording
frame = np.arange(n)
cls = np.where(frame < 10, LAUGHTER, MUSIC)
val = np.full(n, 0.7)
emb = np.random.default_rng(0).normal(size=(n, cfg.embedding_dim))
window = RecordingWindow(rec_ts=90.0, embeddings=emb, score_frame=frame, score_class=cls,
                         score_value=val, num_classes=cfg.num_classes)

print(f"{n} frames of {cfg.frame_len_s} s; the last one has no partner and is dropped")
for p in pair_frames(window, cfg)[:7]:
    name = dict(DEFAULT_CUE_CLASSES).get(p.label_class, f"class {p.label_class}")
    print(f"  pair {p.index:2d}: top class {name:<10} cue={p.is_cue}")
print("  ...")

a = analyze_recording(window, cfg)
print(f"cue pairs {a.n_cue_pairs}/{a.n_pairs} -> cue_pct {a.cue_pct:.2f}")
print(f"cue-positive (>= {cfg.cue_threshold_pct:g}%): {a.cue_pct >= cfg.cue_threshold_pct}")
print(f"{len(a.conv_embeddings)} frame embeddings would go to the speech detector")
