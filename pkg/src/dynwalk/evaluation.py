"""Vertex classification on embeddings: one-vs-rest logistic regression, macro-F1."""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .embed import EmbeddingTable
from .errors import DegenerateClass, TooFewVertices, UnknownVertex


@dataclass
class LabelSet:
    labels: dict[int, set[int]]
    num_classes: int
    multi_label: bool = False

    def __post_init__(self):
        for v, cs in self.labels.items():
            if not cs:
                raise ValueError(f"vertex {v} has no labels")
            if not self.multi_label and len(cs) != 1:
                raise ValueError(f"vertex {v} has {len(cs)} labels in a single-label set")

    def __len__(self) -> int:
        return len(self.labels)

    def vertices(self) -> list[int]:
        return sorted(self.labels)

    def indicator(self, ids) -> np.ndarray:
        y = np.zeros((len(ids), self.num_classes), dtype=bool)
        for i, v in enumerate(ids):
            y[i, list(self.labels[v])] = True
        return y

    @classmethod
    def load(cls, path, id_map=None, multi_label: bool | None = None) -> "LabelSet":
        """Read ``vertex class`` lines; repeated vertices make a multi-label set.

        Class labels are mapped to dense ids in sorted order. ``id_map``
        translates vertex labels to graph ids (lines with unknown vertices are
        skipped).
        """
        raw: list[tuple[str, str]] = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                raw.append((parts[0], parts[1]))
        try:
            classes = sorted({c for _, c in raw}, key=int)
        except ValueError:
            classes = sorted({c for _, c in raw})
        cidx = {c: i for i, c in enumerate(classes)}
        labels: dict[int, set[int]] = {}
        for v, c in raw:
            if id_map is not None:
                if v not in id_map.to_id:
                    continue
                vid = id_map.to_id[v]
            else:
                vid = int(v)
            labels.setdefault(vid, set()).add(cidx[c])
        if multi_label is None:
            multi_label = any(len(s) > 1 for s in labels.values())
        return cls(labels, len(classes), multi_label)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            for v in sorted(self.labels):
                for c in sorted(self.labels[v]):
                    fh.write(f"{v} {c}\n")


def _logistic_objective(params, X, y, l2):
    """0.5*l2*|w|^2 + sum log-loss; intercept is not penalised."""
    w, b = params[:-1], params[-1]
    s = X @ w + b
    # log(1 + exp(-s)) for positives, log(1 + exp(s)) for negatives
    sign = np.where(y, -1.0, 1.0)
    loss = np.logaddexp(0.0, sign * s).sum() + 0.5 * l2 * (w @ w)
    r = expit(s) - y
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r + l2 * w
    grad[-1] = r.sum()
    return loss, grad


@dataclass
class ClassifierConfig:
    l2: float = 1.0
    tol: float = 1e-5
    max_iter: int = 1000


@dataclass
class Classifier:
    weights: np.ndarray  # (num_classes, dim)
    bias: np.ndarray  # (num_classes,)
    degenerate: list[int] = field(default_factory=list)

    @property
    def num_classes(self) -> int:
        return len(self.bias)

    def scores(self, X: np.ndarray) -> np.ndarray:
        return expit(X @ self.weights.T + self.bias)


def fit_binary(X: np.ndarray, y: np.ndarray, cfg: ClassifierConfig) -> tuple[np.ndarray, float]:
    x0 = np.zeros(X.shape[1] + 1)
    res = minimize(
        _logistic_objective, x0, args=(X, y.astype(np.float64), cfg.l2), jac=True,
        method="L-BFGS-B", options={"gtol": cfg.tol, "maxiter": cfg.max_iter},
    )
    return res.x[:-1], float(res.x[-1])


def train_classifier(embeddings: EmbeddingTable, labels: LabelSet, train_ids, cfg: ClassifierConfig | None = None) -> Classifier:
    """One binary logistic regression per class."""
    cfg = cfg or ClassifierConfig()
    train_ids = list(train_ids)
    X = embeddings.matrix(train_ids)
    Y = labels.indicator(train_ids)
    W = np.zeros((labels.num_classes, X.shape[1]))
    b = np.zeros(labels.num_classes)
    degenerate = []
    for k in range(labels.num_classes):
        if not Y[:, k].any():
            degenerate.append(k)
            b[k] = -np.inf
            warnings.warn(f"class {k} has no positive training examples", DegenerateClass, stacklevel=2)
            continue
        W[k], b[k] = fit_binary(X, Y[:, k], cfg)
    return Classifier(W, b, degenerate)


def predict(classifier: Classifier, embeddings: EmbeddingTable, ids, labels_meta: LabelSet | None = None) -> list[set[int]]:
    """Single-label: argmax score. Multi-label: the top-k classes, k = true label count."""
    ids = list(ids)
    for v in ids:
        if v not in embeddings:
            raise UnknownVertex(v)
    scores = classifier.scores(embeddings.matrix(ids)) if ids else np.zeros((0, classifier.num_classes))
    return predict_from_scores(scores, ids, labels_meta)


def predict_from_scores(scores: np.ndarray, ids, labels_meta: LabelSet | None = None) -> list[set[int]]:
    multi = labels_meta is not None and labels_meta.multi_label
    out = []
    for i, v in enumerate(ids):
        if multi:
            k = len(labels_meta.labels[v])
            top = np.argsort(-scores[i], kind="stable")[:k]
            out.append(set(int(c) for c in top))
        else:
            out.append({int(np.argmax(scores[i]))})
    return out


def macro_f1(predicted, truth, num_classes: int) -> float:
    """Unweighted mean of per-class F1; empty classes count as 0."""
    predicted, truth = list(predicted), list(truth)
    if len(predicted) != len(truth):
        raise ValueError("predicted and truth differ in length")
    tp = np.zeros(num_classes)
    fp = np.zeros(num_classes)
    fn = np.zeros(num_classes)
    for p, t in zip(predicted, truth):
        p, t = set(p), set(t)
        for c in p & t:
            tp[c] += 1
        for c in p - t:
            fp[c] += 1
        for c in t - p:
            fn[c] += 1
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros(num_classes), where=denom > 0)
    return float(f1.mean())


@dataclass
class EvalReport:
    macro_f1_mean: float
    macro_f1_std: float
    per_split: list[float]
    train_fraction: float
    n_splits: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    CSV_HEADER = ("macro_f1_mean", "macro_f1_std", "train_fraction", "n_splits")

    def csv_row(self) -> list:
        return [self.macro_f1_mean, self.macro_f1_std, self.train_fraction, self.n_splits]


def evaluate(embeddings: EmbeddingTable, labels: LabelSet, lcc, train_fraction: float = 0.09,
             n_splits: int = 10, rng=0, cfg: ClassifierConfig | None = None) -> EvalReport:
    """Repeated random train/test splits over labelled, embedded LCC vertices."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    pool = np.array(sorted(v for v in lcc if v in labels.labels and v in embeddings), dtype=np.int64)
    n_train = int(round(train_fraction * len(pool)))
    if n_train < 1 or n_train >= len(pool):
        raise TooFewVertices(f"{len(pool)} labelled vertices cannot be split at {train_fraction}")
    X_all = embeddings.matrix(pool)
    scores = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateClass)
        for _ in range(n_splits):
            perm = gen.permutation(len(pool))
            tr, te = perm[:n_train], perm[n_train:]
            clf = train_classifier(embeddings, labels, pool[tr].tolist(), cfg)
            test_ids = pool[te].tolist()
            pred = predict_from_scores(clf.scores(X_all[te]), test_ids, labels)
            truth = [labels.labels[v] for v in test_ids]
            scores.append(macro_f1(pred, truth, labels.num_classes))
    arr = np.array(scores)
    return EvalReport(float(arr.mean()), float(arr.std()), scores, train_fraction, n_splits)
