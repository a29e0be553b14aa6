"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 replay and
oracle disagree.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, DetectorConfig, load_config
from .fsd import (
    LinearFsModel,
    ModelFormatError,
    TrainingHyper,
    evaluate_balanced_accuracy,
    load_labelled_csv,
    train_linear,
)
from .report import build_report, format_text, write_report
from .sim.generate import ScenarioError, generate_trace, load_scenario, reference_model
from .sim.metrics import auto_feedback
from .sim.oracle import brute_force_oracle
from .sim.replay import (
    detection_log_lines,
    feedback_log_lines,
    read_detection_log,
    read_feedback_log,
    replay,
)
from .sim.trace import TraceError, load_trace, save_trace

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 0, 1, 2, 3

logger = logging.getLogger("convodetect")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class DataError(Exception):
    pass


def _config(path: str | None) -> DetectorConfig | None:
    if path is None:
        return None
    if not Path(path).exists():
        raise DataError(f"config not found: {path}")
    return load_config(path)


def _model(path: str, cfg: DetectorConfig) -> LinearFsModel:
    if not Path(path).exists():
        raise DataError(f"model not found: {path}")
    return LinearFsModel.load(path, cfg.embedding_dim)


def cmd_generate(args) -> int:
    cfg = _config(args.config) or DetectorConfig()
    if not Path(args.scenario).exists():
        raise DataError(f"scenario not found: {args.scenario}")
    spec = load_scenario(args.scenario)
    trace = generate_trace(spec, args.seed, cfg)
    save_trace(trace, args.out)
    n_rec = len(trace.recordings)
    print(f"wrote {args.out}: {len(trace.events)} events, {n_rec} recordings")
    return EXIT_OK


def cmd_reference_model(args) -> int:
    cfg = _config(args.config) or DetectorConfig()
    reference_model(cfg).save(args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    explicit_cfg = _config(args.config)
    log_lines: list[str] = []
    fb_lines: list[str] = []
    model_cache: dict[int, LinearFsModel] = {}
    mismatches = 0
    for path in args.traces:
        if not Path(path).exists():
            raise DataError(f"trace not found: {path}")
        trace = load_trace(path)
        cfg = explicit_cfg or trace.metadata.detector_config()
        if cfg.embedding_dim not in model_cache:
            model_cache[cfg.embedding_dim] = _model(args.model, cfg)
        fsd = model_cache[cfg.embedding_dim]
        detections, metrics = replay(trace, fsd, cfg)
        sid = trace.metadata.sid
        if args.oracle_check:
            expected = brute_force_oracle(trace, fsd, cfg)
            got = [(d.start, d.end) for d in detections]
            want = [(d.start, d.end) for d in expected]
            if got != want:
                mismatches += 1
                k = next((i for i, (a, b) in enumerate(zip(got, want)) if a != b), min(len(got), len(want)))
                a = got[k] if k < len(got) else None
                b = want[k] if k < len(want) else None
                print(f"{path}: oracle mismatch at detection {k}: replay {a} vs oracle {b}", file=sys.stderr)
        log_lines.extend(detection_log_lines(sid, detections, trace.metadata.participant_id))
        if args.feedback_out:
            fb_lines.extend(feedback_log_lines(sid, auto_feedback(detections, trace.ground_truth)))
        print(json.dumps({"trace": str(path), "session_id": sid, "metrics": metrics.to_dict()}))
    if args.out:
        Path(args.out).write_text("".join(line + "\n" for line in log_lines))
    else:
        for line in log_lines:
            print(line)
    if args.feedback_out:
        Path(args.feedback_out).write_text("".join(line + "\n" for line in fb_lines))
    if mismatches:
        print(f"oracle check failed on {mismatches} of {len(args.traces)} trace(s)", file=sys.stderr)
        return EXIT_MISMATCH
    if args.oracle_check:
        print(f"oracle check passed on {len(args.traces)} trace(s)", file=sys.stderr)
    return EXIT_OK


def cmd_train_fsd(args) -> int:
    cfg = _config(args.config)
    x, y = load_labelled_csv(args.data, cfg.embedding_dim if cfg else None)
    hyper = TrainingHyper(args.learning_rate, args.epochs, args.l2, args.seed)
    model = train_linear((x, y), hyper, threshold=args.threshold)
    model.save(args.out)
    print(f"wrote {args.out}; training balanced accuracy {evaluate_balanced_accuracy(model, (x, y)):.2f}")
    return EXIT_OK


def cmd_eval_fsd(args) -> int:
    if not Path(args.model).exists():
        raise DataError(f"model not found: {args.model}")
    model = LinearFsModel.load(args.model)
    x, y = load_labelled_csv(args.data, model.embedding_dim)
    print(f"{evaluate_balanced_accuracy(model, (x, y)):.2f}")
    return EXIT_OK


def cmd_report(args) -> int:
    detections = []
    for path in args.detections:
        if not Path(path).exists():
            raise DataError(f"detection log not found: {path}")
        detections.extend(read_detection_log(path))
    feedback = []
    for path in args.feedback or []:
        if not Path(path).exists():
            raise DataError(f"feedback log not found: {path}")
        feedback.extend(read_feedback_log(path))
    truth = {}
    for path in args.trace or []:
        trace = load_trace(path)
        truth.setdefault(trace.metadata.sid, []).extend(trace.ground_truth)
    bundle = build_report(detections, feedback, truth)
    if args.out:
        write_report(bundle, args.out)
    sys.stdout.write(format_text(bundle))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="convodetect", description="Simulate, replay, train and report on duty-cycled conversation detection.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="synthesize a trace from a scenario file")
    g.add_argument("scenario")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--config")
    g.set_defaults(func=cmd_generate)

    m = sub.add_parser("reference-model", help="write the reference detector used by the generator")
    m.add_argument("--out", required=True)
    m.add_argument("--config")
    m.set_defaults(func=cmd_reference_model)

    r = sub.add_parser("replay", help="run traces through the detector")
    r.add_argument("traces", nargs="+")
    r.add_argument("--model", required=True)
    r.add_argument("--config", help="defaults to each trace's own config snapshot")
    r.add_argument("--oracle-check", action="store_true")
    r.add_argument("--out", help="detection log path (default: stdout)")
    r.add_argument("--feedback-out", help="write simulated yes/no feedback from ground truth")
    r.set_defaults(func=cmd_replay)

    t = sub.add_parser("train-fsd", help="fit the linear foreground-speech head")
    t.add_argument("data")
    t.add_argument("--out", required=True)
    t.add_argument("--learning-rate", type=float, default=0.1)
    t.add_argument("--epochs", type=int, default=500)
    t.add_argument("--l2", type=float, default=0.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--threshold", type=float, default=0.5)
    t.add_argument("--config")
    t.set_defaults(func=cmd_train_fsd)

    e = sub.add_parser("eval-fsd", help="balanced accuracy of a model on labelled data")
    e.add_argument("model")
    e.add_argument("data")
    e.set_defaults(func=cmd_eval_fsd)

    rep = sub.add_parser("report", help="tabulate detection and feedback logs")
    rep.add_argument("--detections", nargs="+", required=True)
    rep.add_argument("--feedback", nargs="*")
    rep.add_argument("--trace", nargs="*", help="traces supplying ground truth for boundary deltas")
    rep.add_argument("--out", help="directory for CSV tables")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (DataError, ConfigError, ScenarioError, TraceError, ModelFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
