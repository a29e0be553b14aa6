import sys

import numpy as np
import pytest

from convodetect import DetectorConfig, LinearFsModel
from convodetect.frames import RecordingAnalysis
from convodetect.sim.generate import reference_model

SMALL_DIM = 16


@pytest.fixture
def cfg():
    return DetectorConfig()


@pytest.fixture
def small_cfg():
    return DetectorConfig(embedding_dim=SMALL_DIM)


@pytest.fixture
def small_model(small_cfg):
    return reference_model(small_cfg)


def fs_embeddings(n_fs: int, n_total: int, dim: int) -> np.ndarray:
    """Rows classified FS (first n_fs) or not by a model with weights e0 and bias 0."""
    emb = np.zeros((n_total, dim))
    emb[:n_fs, 0] = 1.0
    emb[n_fs:, 0] = -1.0
    return emb


def e0_model(dim: int) -> LinearFsModel:
    w = np.zeros(dim)
    w[0] = 1.0
    return LinearFsModel(w, 0.0)


def analysis(cue_pairs: int, fs_frames: int, dim: int, n_pairs: int = 16) -> RecordingAnalysis:
    """Recording summary with ``cue_pairs`` cue pairs, ``fs_frames`` of whose frames are FS."""
    return RecordingAnalysis.from_counts(n_pairs, cue_pairs, fs_embeddings(fs_frames, 2 * cue_pairs, dim))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in mod.RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
