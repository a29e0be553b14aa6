"""Cross-session report tables built from detection and feedback logs."""

from __future__ import annotations

import csv
import io
import logging
import statistics
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .sim.metrics import (
    SessionMetrics,
    duration_histogram,
    feedback_rates,
    match_ground_truth,
    resolve_feedback,
)
from .sim.replay import DetectionRecord
from .types import GroundTruthInterval

logger = logging.getLogger(__name__)


@dataclass
class ParticipantRow:
    participant_id: str
    n_detections: int
    n_feedback: int
    n_yes: int
    n_no: int
    n_maybe: int

    @property
    def accuracy_pct(self) -> float | None:
        return 100.0 * self.n_yes / self.n_feedback if self.n_feedback else None

    @property
    def maybe_pct(self) -> float | None:
        return 100.0 * self.n_maybe / self.n_feedback if self.n_feedback else None


@dataclass
class ReportBundle:
    sessions: dict[str, SessionMetrics]
    participants: list[ParticipantRow]
    aggregate_accuracy_pct: float | None
    participant_mean_accuracy_pct: float | None
    participant_sd_accuracy_pct: float | None
    duration_histogram_all: tuple[int, int, int]
    duration_histogram_yes: tuple[int, int, int]
    boundary_deltas: list[dict] = field(default_factory=list)
    fs_pct_by_outcome: dict[str, list[float]] = field(default_factory=dict)
    n_detections: int = 0
    n_feedback: int = 0
    n_yes: int = 0

    def fs_quartiles(self) -> list[dict]:
        rows = []
        for label in ("yes", "no", "maybe", "unlabeled"):
            vals = self.fs_pct_by_outcome.get(label)
            if not vals:
                continue
            q = np.percentile(vals, [0, 25, 50, 75, 100])
            rows.append({"outcome": label, "n": len(vals), "min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]})
        return rows


def build_report(
    detections: Sequence[DetectionRecord],
    feedback: Iterable[tuple[str, int, str]] = (),
    ground_truth: dict[str, list[GroundTruthInterval]] | None = None,
) -> ReportBundle:
    """Aggregate detections and feedback across sessions.

    Feedback refers to detections by their position within a session in the
    detection log. Aggregate accuracy pools all labels; the per-participant
    mean and sample SD weight every participant equally.
    """
    by_session: dict[str, list[DetectionRecord]] = defaultdict(list)
    for rec in detections:
        by_session[rec.session_id].append(rec)
    fb_by_session: dict[str, list[tuple[int, str]]] = defaultdict(list)
    for sid, idx, label in feedback:
        if sid not in by_session:
            logger.warning("feedback for unknown session %r ignored", sid)
            continue
        fb_by_session[sid].append((idx, label))

    ground_truth = ground_truth or {}
    sessions: dict[str, SessionMetrics] = {}
    per_participant: dict[str, ParticipantRow] = {}
    all_labels: list[str] = []
    durations_all: list[float] = []
    durations_yes: list[float] = []
    boundary_rows: list[dict] = []
    by_outcome: dict[str, list[float]] = defaultdict(list)

    for sid in sorted(by_session):
        recs = by_session[sid]
        inters = [r.interaction for r in recs]
        labels = resolve_feedback(len(inters), fb_by_session.get(sid, []))
        acc, maybe, n_fb, n_yes = feedback_rates(labels.values())
        truth = ground_truth.get(sid, [])
        recall = None
        errors = []
        if truth:
            matched = match_ground_truth(inters, truth)
            recall = len({k for k in matched if k is not None}) / len(truth)
            for i, (d, k) in enumerate(zip(inters, matched)):
                if k is None:
                    continue
                errors.append((d.start - truth[k].start, d.end - truth[k].end))
                boundary_rows.append({
                    "session_id": sid,
                    "detection_index": i,
                    "truth_start": truth[k].start,
                    "truth_end": truth[k].end,
                    "detected_start": d.start,
                    "detected_end": d.end,
                    "start_delta_s": d.start - truth[k].start,
                    "end_delta_s": d.end - truth[k].end,
                })
        outcome: dict[str, list[float]] = defaultdict(list)
        for i, d in enumerate(inters):
            lab = labels.get(i, "unlabeled")
            outcome[lab].append(d.fs_pct_at_close)
            by_outcome[lab].append(d.fs_pct_at_close)
            durations_all.append(d.duration_s)
            if lab == "yes":
                durations_yes.append(d.duration_s)
        sessions[sid] = SessionMetrics(
            detections=inters,
            accuracy_pct=acc,
            maybe_pct=maybe,
            recall=recall,
            boundary_errors=errors,
            fs_pct_by_outcome=dict(outcome),
            duration_histogram=duration_histogram(d.duration_s for d in inters),
            n_feedback=n_fb,
            n_yes=n_yes,
        )
        pid = recs[0].participant_id or sid
        row = per_participant.setdefault(pid, ParticipantRow(pid, 0, 0, 0, 0, 0))
        row.n_detections += len(inters)
        row.n_feedback += n_fb
        row.n_yes += n_yes
        row.n_no += sum(1 for v in labels.values() if v == "no")
        row.n_maybe += sum(1 for v in labels.values() if v == "maybe")
        all_labels.extend(labels.values())

    participants = sorted(per_participant.values(), key=lambda r: r.participant_id)
    agg, _, n_fb, n_yes = feedback_rates(all_labels)
    accs = [r.accuracy_pct for r in participants if r.accuracy_pct is not None]
    mean = statistics.fmean(accs) if accs else None
    sd = statistics.stdev(accs) if len(accs) > 1 else None
    return ReportBundle(
        sessions=sessions,
        participants=participants,
        aggregate_accuracy_pct=agg,
        participant_mean_accuracy_pct=mean,
        participant_sd_accuracy_pct=sd,
        duration_histogram_all=duration_histogram(durations_all),
        duration_histogram_yes=duration_histogram(durations_yes),
        boundary_deltas=boundary_rows,
        fs_pct_by_outcome=dict(by_outcome),
        n_detections=len(durations_all),
        n_feedback=n_fb,
        n_yes=n_yes,
    )


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def _csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buf.getvalue()


def report_tables(bundle: ReportBundle) -> dict[str, str]:
    """CSV text per table, keyed by file name."""
    has_feedback = bundle.n_feedback > 0
    part_cols = ["participant_id", "n_detections"]
    if has_feedback:
        part_cols += ["n_feedback", "n_yes", "n_no", "n_maybe", "accuracy_pct", "maybe_pct"]
    part_rows = [
        {
            "participant_id": r.participant_id,
            "n_detections": r.n_detections,
            "n_feedback": r.n_feedback,
            "n_yes": r.n_yes,
            "n_no": r.n_no,
            "n_maybe": r.n_maybe,
            "accuracy_pct": r.accuracy_pct,
            "maybe_pct": r.maybe_pct,
        }
        for r in bundle.participants
    ]
    summary = [
        {"metric": "n_detections", "value": bundle.n_detections},
        {"metric": "duration_lt_1min", "value": bundle.duration_histogram_all[0]},
        {"metric": "duration_1_to_2min", "value": bundle.duration_histogram_all[1]},
        {"metric": "duration_ge_2min", "value": bundle.duration_histogram_all[2]},
    ]
    if has_feedback:
        summary += [
            {"metric": "n_feedback", "value": bundle.n_feedback},
            {"metric": "n_yes", "value": bundle.n_yes},
            {"metric": "aggregate_accuracy_pct", "value": bundle.aggregate_accuracy_pct},
            {"metric": "participant_mean_accuracy_pct", "value": bundle.participant_mean_accuracy_pct},
            {"metric": "participant_sd_accuracy_pct", "value": bundle.participant_sd_accuracy_pct},
            {"metric": "yes_duration_lt_1min", "value": bundle.duration_histogram_yes[0]},
            {"metric": "yes_duration_1_to_2min", "value": bundle.duration_histogram_yes[1]},
            {"metric": "yes_duration_ge_2min", "value": bundle.duration_histogram_yes[2]},
        ]
    summary = [{"metric": r["metric"], "value": _fmt(r["value"]) if isinstance(r["value"], float) else r["value"]} for r in summary]
    tables = {
        "summary.csv": _csv(summary, ["metric", "value"]),
        "participants.csv": _csv(part_rows, part_cols),
        "fs_pct_by_outcome.csv": _csv(bundle.fs_quartiles(), ["outcome", "n", "min", "q1", "median", "q3", "max"]),
    }
    if bundle.boundary_deltas:
        tables["boundary_deltas.csv"] = _csv(
            bundle.boundary_deltas,
            ["session_id", "detection_index", "truth_start", "truth_end", "detected_start",
             "detected_end", "start_delta_s", "end_delta_s"],
        )
    return tables


def format_text(bundle: ReportBundle) -> str:
    lines = [f"detections: {bundle.n_detections}"]
    lo, mid, hi = bundle.duration_histogram_all
    lines.append(f"durations: <1 min {lo} | 1-2 min {mid} | >=2 min {hi}")
    if bundle.n_feedback:
        lines.append(
            f"aggregate accuracy: {bundle.aggregate_accuracy_pct:.2f}% "
            f"({bundle.n_yes} yes of {bundle.n_feedback} labelled)"
        )
        if bundle.participant_mean_accuracy_pct is not None:
            sd = bundle.participant_sd_accuracy_pct
            sd_txt = f" (SD {sd:.2f})" if sd is not None else ""
            lines.append(f"per-participant mean accuracy: {bundle.participant_mean_accuracy_pct:.2f}%{sd_txt}")
    lines.append("")
    header = f"{'participant':<14}{'detections':>11}"
    if bundle.n_feedback:
        header += f"{'labelled':>10}{'yes':>6}{'no':>6}{'maybe':>7}{'acc %':>9}"
    lines.append(header)
    for r in bundle.participants:
        row = f"{r.participant_id:<14}{r.n_detections:>11}"
        if bundle.n_feedback:
            acc = f"{r.accuracy_pct:.2f}" if r.accuracy_pct is not None else "-"
            row += f"{r.n_feedback:>10}{r.n_yes:>6}{r.n_no:>6}{r.n_maybe:>7}{acc:>9}"
        lines.append(row)
    quart = bundle.fs_quartiles()
    if quart:
        lines.append("")
        lines.append("foreground speech % at close, by outcome:")
        for q in quart:
            lines.append(
                f"  {q['outcome']:<10} n={q['n']:<5} min {q['min']:.1f}  q1 {q['q1']:.1f}  "
                f"median {q['median']:.1f}  q3 {q['q3']:.1f}  max {q['max']:.1f}"
            )
    if bundle.boundary_deltas:
        starts = [b["start_delta_s"] for b in bundle.boundary_deltas]
        ends = [b["end_delta_s"] for b in bundle.boundary_deltas]
        lines.append("")
        lines.append(
            f"boundary deltas over {len(starts)} matched detections: "
            f"start mean {statistics.fmean(starts):+.1f} s, end mean {statistics.fmean(ends):+.1f} s"
        )
    return "\n".join(lines) + "\n"


def write_report(bundle: ReportBundle, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in report_tables(bundle).items():
        path = out / name
        path.write_text(text)
        written.append(path)
    (out / "report.txt").write_text(format_text(bundle))
    written.append(out / "report.txt")
    return written
