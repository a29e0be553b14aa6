import json
from pathlib import Path

import numpy as np
import pytest

from convodetect.cli import main
from convodetect.fsd import save_labelled_csv, separable_fixture
from convodetect.sim.generate import generate_trace, random_scenario, reference_model
from convodetect.sim.trace import save_trace

DATA = Path(__file__).parent / "data"


@pytest.fixture
def small_ini(tmp_path, small_cfg):
    from convodetect.config import dump_config

    path = tmp_path / "small.ini"
    path.write_text(dump_config(small_cfg))
    return path


def _scenario(tmp_path, body):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(body))
    return path


def test_generate_deterministic(tmp_path, small_ini):
    sc = _scenario(tmp_path, {"session_length_s": 3000, "intervals": [{"start": 300, "end": 900}]})
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["generate", str(sc), "--seed", "5", "--out", str(a), "--config", str(small_ini)]) == 0
    assert main(["generate", str(sc), "--seed", "5", "--out", str(b), "--config", str(small_ini)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_generate_malformed_scenario(tmp_path, capsys):
    sc = _scenario(tmp_path, {"session_length_s": 3000, "intervals": [{"start": 300, "end": 900, "cue_density": 3}]})
    rc = main(["generate", str(sc), "--seed", "1", "--out", str(tmp_path / "x.jsonl")])
    assert rc == 2
    assert "cue_density" in capsys.readouterr().err


def test_replay_matches_golden(tmp_path):
    out = tmp_path / "det.jsonl"
    rc = main(["replay", str(DATA / "fixture_trace.jsonl"), "--model", str(DATA / "fixture_model.json"),
               "--config", str(DATA / "fixture_config.ini"), "--oracle-check", "--out", str(out)])
    assert rc == 0
    assert out.read_text() == (DATA / "fixture_golden.jsonl").read_text()


def test_oracle_check_on_many_traces(tmp_path, small_cfg, capsys):
    model = tmp_path / "m.json"
    reference_model(small_cfg).save(model)
    rng = np.random.default_rng(77)
    paths = []
    for seed in range(100):
        spec = random_scenario(rng, session_length_s=3 * 3600.0)
        p = tmp_path / f"t{seed}.jsonl"
        save_trace(generate_trace(spec, seed, small_cfg), p)
        paths.append(str(p))
    rc = main(["replay", *paths, "--model", str(model), "--oracle-check", "--out", str(tmp_path / "d.jsonl")])
    assert rc == 0
    assert "oracle check passed on 100" in capsys.readouterr().err


def test_missing_model(tmp_path, capsys):
    rc = main(["replay", str(DATA / "fixture_trace.jsonl"), "--model", str(tmp_path / "nope.json")])
    assert rc == 2
    assert "model not found" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_train_and_eval(tmp_path, capsys):
    x, y = separable_fixture()
    data = tmp_path / "d.csv"
    save_labelled_csv(data, x, y)
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    assert main(["train-fsd", str(data), "--out", str(m1), "--seed", "3"]) == 0
    assert main(["train-fsd", str(data), "--out", str(m2), "--seed", "3"]) == 0
    assert m1.read_bytes() == m2.read_bytes()
    capsys.readouterr()
    assert main(["eval-fsd", str(m1), str(data)]) == 0
    assert capsys.readouterr().out.strip() == "100.00"


def test_train_single_class(tmp_path, capsys):
    x, y = separable_fixture()
    data = tmp_path / "d.csv"
    save_labelled_csv(data, x[y == 1], y[y == 1])
    assert main(["train-fsd", str(data), "--out", str(tmp_path / "m.json")]) == 2
    assert "degenerate" in capsys.readouterr().err


def test_report_roundtrip(tmp_path, capsys):
    det, fb, out = tmp_path / "det.jsonl", tmp_path / "fb.jsonl", tmp_path / "report"
    assert main(["replay", str(DATA / "fixture_trace.jsonl"), "--model", str(DATA / "fixture_model.json"),
                 "--out", str(det), "--feedback-out", str(fb)]) == 0
    capsys.readouterr()
    assert main(["report", "--detections", str(det), "--feedback", str(fb),
                 "--trace", str(DATA / "fixture_trace.jsonl"), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "detections: 3" in text
    assert "aggregate accuracy: 100.00%" in text
    summary = (out / "summary.csv").read_text()
    assert "n_detections,3" in summary
    assert (out / "boundary_deltas.csv").read_text().count("\n") == 4
    assert "P7" in (out / "participants.csv").read_text()
