"""Foreground speech detection over frame embeddings.

Any object with a ``classify(embeddings) -> np.ndarray`` method returning
0/1 per row can serve as the detector. ``LinearFsModel`` is the reference
implementation: a logistic head over the tagger embeddings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

MODEL_FORMAT = "convodetect-linear-fsd/1"


class ModelFormatError(ValueError):
    pass


@runtime_checkable
class FsDetector(Protocol):
    embedding_dim: int

    def classify(self, embeddings: np.ndarray) -> np.ndarray:
        """Return one 0/1 decision per embedding row."""
        ...


def _as_matrix(embeddings, dim: int) -> np.ndarray:
    if isinstance(embeddings, np.ndarray) and embeddings.ndim == 2:
        if embeddings.shape[1] != dim and len(embeddings):
            raise ValueError(f"embedding 0 has length {embeddings.shape[1]}, expected {dim}")
        return embeddings.reshape(len(embeddings), dim)
    rows = list(embeddings)
    for i, row in enumerate(rows):
        if len(row) != dim:
            raise ValueError(f"embedding {i} has length {len(row)}, expected {dim}")
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), dim)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True, eq=False)
class LinearFsModel:
    weights: np.ndarray
    bias: float = 0.0
    threshold: float = 0.5

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("weights must be a nonempty vector")
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias) and np.isfinite(self.threshold)):
            raise ValueError("model parameters must be finite")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def embedding_dim(self) -> int:
        return len(self.weights)

    def logits(self, embeddings) -> np.ndarray:
        x = _as_matrix(embeddings, self.embedding_dim)
        return x @ self.weights + self.bias

    def predict_proba(self, embeddings) -> np.ndarray:
        return _sigmoid(self.logits(embeddings))

    def classify(self, embeddings) -> np.ndarray:
        z = self.logits(embeddings)
        if self.threshold == 0.5:
            # exact sign test, immune to sigmoid rounding near 0
            return (z >= 0).astype(np.int8)
        return (_sigmoid(z) >= self.threshold).astype(np.int8)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearFsModel):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.threshold == other.threshold
        )

    def to_json(self) -> str:
        payload = {
            "format": MODEL_FORMAT,
            "embedding_dim": self.embedding_dim,
            "bias": self.bias,
            "threshold": self.threshold,
            "weights": self.weights.tolist(),
        }
        return json.dumps(payload) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str, embedding_dim: int | None = None) -> "LinearFsModel":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"model file is not valid JSON: {exc}") from None
        if payload.get("format") != MODEL_FORMAT:
            raise ModelFormatError(f"unsupported model format {payload.get('format')!r}")
        try:
            dim = int(payload["embedding_dim"])
            model = cls(np.array(payload["weights"], dtype=np.float64), payload["bias"], payload["threshold"])
        except KeyError as exc:
            raise ModelFormatError(f"model file missing field {exc}") from None
        if model.embedding_dim != dim:
            raise ModelFormatError(f"model declares embedding_dim {dim} but has {model.embedding_dim} weights")
        if embedding_dim is not None and dim != embedding_dim:
            raise ModelFormatError(f"model embedding_dim {dim} does not match config embedding_dim {embedding_dim}")
        return model

    @classmethod
    def load(cls, path: str | Path, embedding_dim: int | None = None) -> "LinearFsModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"model not found: {path}")
        return cls.from_json(path.read_text(), embedding_dim)


def classify(model: FsDetector, embeddings) -> np.ndarray:
    """Run ``model`` over a list/array of embeddings and check the result shape."""
    x = _as_matrix(embeddings, model.embedding_dim)
    if len(x) == 0:
        return np.zeros(0, dtype=np.int8)
    out = np.asarray(model.classify(x))
    if out.shape != (len(x),):
        raise ValueError(f"detector returned shape {out.shape} for {len(x)} embeddings")
    if not np.all((out == 0) | (out == 1)):
        raise ValueError("detector outputs must be 0 or 1")
    return out.astype(np.int8)


@dataclass(frozen=True)
class TrainingHyper:
    learning_rate: float = 0.1
    epochs: int = 500
    l2: float = 0.0
    seed: int = 0


def regularized_log_loss(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    z = x @ w + b
    # log(1 + e^z) - y z, written stably
    loss = np.logaddexp(0.0, z) - y * z
    return float(loss.mean() + 0.5 * l2 * np.dot(w, w))


def train_linear(
    data: Sequence[tuple[Sequence[float], int]] | tuple[np.ndarray, np.ndarray],
    hyper: TrainingHyper = TrainingHyper(),
    *,
    threshold: float = 0.5,
    loss_history: list[float] | None = None,
) -> LinearFsModel:
    """Fit a logistic head by full-batch gradient descent.

    ``data`` is either a list of ``(embedding, label)`` pairs or an
    ``(X, y)`` tuple of arrays. The seed fixes the small random
    initialisation of the weights, so a rerun with the same inputs gives a
    bit-identical model. If ``loss_history`` is given, the loss before each
    epoch and after the last one is appended to it.
    """
    x, y = _as_xy(data)
    if len(x) == 0:
        raise ValueError("empty training set")
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate training set: both labels 0 and 1 are required")
    if hyper.epochs < 0 or not hyper.learning_rate > 0 or hyper.l2 < 0:
        raise ValueError("invalid training hyperparameters")
    rng = np.random.default_rng(hyper.seed)
    n, d = x.shape
    w = rng.normal(0.0, 0.01, size=d)
    b = 0.0
    for _ in range(hyper.epochs):
        if loss_history is not None:
            loss_history.append(regularized_log_loss(x, y, w, b, hyper.l2))
        err = _sigmoid(x @ w + b) - y
        w = w - hyper.learning_rate * (x.T @ err / n + hyper.l2 * w)
        b = b - hyper.learning_rate * float(err.mean())
    if loss_history is not None:
        loss_history.append(regularized_log_loss(x, y, w, b, hyper.l2))
    return LinearFsModel(w, b, threshold)


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, tuple) and len(data) == 2 and isinstance(data[0], np.ndarray):
        x, y = data
    else:
        pairs = list(data)
        if not pairs:
            return np.zeros((0, 0)), np.zeros(0)
        x = np.array([p[0] for p in pairs], dtype=np.float64)
        y = np.array([p[1] for p in pairs])
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    return np.asarray(x, dtype=np.float64), y.astype(np.float64)


def evaluate_balanced_accuracy(model: FsDetector, data) -> float:
    """Mean of the per-class recalls, in percent."""
    x, y = _as_xy(data)
    if len(x) == 0 or len(np.unique(y)) < 2:
        raise ValueError("evaluation data must contain both classes")
    pred = classify(model, x)
    recalls = [float(np.mean(pred[y == c] == c)) for c in (0, 1)]
    return 100.0 * sum(recalls) / 2


def separable_fixture(n_per_class: int = 100, dim: int = 8, seed: int = 0, margin: float = 1.0):
    """Two Gaussian-jittered clusters centred at +/-margin along dimension 0.

    Returns ``(X, y)``; every point keeps the sign of its cluster on dim 0,
    so the hyperplane ``x0 = 0`` separates the classes exactly.
    """
    rng = np.random.default_rng(seed)
    pos = rng.normal(0.0, 0.2, size=(n_per_class, dim))
    neg = rng.normal(0.0, 0.2, size=(n_per_class, dim))
    pos[:, 0] = margin + np.abs(rng.normal(0.0, 0.1, n_per_class))
    neg[:, 0] = -margin - np.abs(rng.normal(0.0, 0.1, n_per_class))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(n_per_class), np.zeros(n_per_class)])
    return x, y


def save_labelled_csv(path: str | Path, x: np.ndarray, y: np.ndarray) -> None:
    """Write ``label,e0,e1,...`` rows with a header line."""
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(",".join(["label"] + [f"e{i}" for i in range(x.shape[1])]) + "\n")
        for row, lab in zip(x, y):
            fh.write(",".join([str(int(lab))] + [repr(float(v)) for v in row]) + "\n")


def load_labelled_csv(path: str | Path, embedding_dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")
    rows, labels = [], []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if not header or header[0] != "label":
            raise ValueError(f"{path}: line 1: header must start with 'label'")
        dim = len(header) - 1
        if embedding_dim is not None and dim != embedding_dim:
            raise ValueError(f"{path}: {dim} embedding columns, expected {embedding_dim}")
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            parts = raw.strip().split(",")
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: line {lineno}: expected {dim + 1} fields, got {len(parts)}")
            try:
                lab = int(parts[0])
                vals = [float(p) for p in parts[1:]]
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric field") from None
            if lab not in (0, 1):
                raise ValueError(f"{path}: line {lineno}: label must be 0 or 1")
            labels.append(lab)
            rows.append(vals)
    return np.array(rows, dtype=np.float64).reshape(len(rows), dim), np.array(labels)
