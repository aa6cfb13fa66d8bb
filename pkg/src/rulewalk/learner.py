"""Linear rule scorer trained with cross-entropy.

One weight per candidate rule; a query's score is the logistic of the
weighted sum of its rule features.  Training is deterministic full-batch
gradient descent from zero.  Probabilities are clamped away from 0 and 1
before any log so the loss stays finite regardless of the weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rules import evaluate
from .walk import reach_probability

CLAMP_EPS = 1e-7


@dataclass
class FeatureMatrix:
    features: np.ndarray  # (n_queries, n_rules), values in [0, 1]
    labels: np.ndarray    # (n_queries,), 0/1

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise ValueError("feature matrix and labels have mismatched shapes")


@dataclass
class ModelParams:
    theta: np.ndarray
    bias: float

    def __post_init__(self) -> None:
        self.theta = np.asarray(self.theta, dtype=float)


@dataclass
class TrainResult:
    params: ModelParams
    losses: list[float]


def _clamp(p):
    return np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)


def score(features_row, params: ModelParams) -> float:
    """Logistic score of one feature row, clamped to (0, 1)."""
    row = np.asarray(features_row, dtype=float)
    if row.shape != params.theta.shape:
        raise ValueError(
            f"feature row has {row.shape} entries, model has {params.theta.shape}"
        )
    z = params.bias + float(row @ params.theta)
    return float(_clamp(1.0 / (1.0 + np.exp(-z))))


def _scores(matrix: FeatureMatrix, params: ModelParams) -> np.ndarray:
    z = params.bias + matrix.features @ params.theta
    return _clamp(1.0 / (1.0 + np.exp(-z)))


def loss(matrix: FeatureMatrix, params: ModelParams, l2: float = 0.0) -> float:
    """Mean negated cross-entropy plus l2 * ||theta||^2."""
    if l2 < 0:
        raise ValueError("l2 must be >= 0")
    f = _scores(matrix, params)
    y = matrix.labels
    ce = -(y * np.log(f) + (1.0 - y) * np.log(1.0 - f))
    return float(np.mean(ce) + l2 * float(params.theta @ params.theta))


def gradient(
    matrix: FeatureMatrix, params: ModelParams, l2: float = 0.0
) -> tuple[np.ndarray, float]:
    """Analytic gradient (d/dtheta, d/dbias) of `loss`."""
    f = _scores(matrix, params)
    residual = f - matrix.labels
    n = matrix.features.shape[0]
    grad_theta = matrix.features.T @ residual / n + 2.0 * l2 * params.theta
    grad_bias = float(np.mean(residual))
    return grad_theta, grad_bias


def train(
    matrix: FeatureMatrix,
    lr: float = 0.1,
    epochs: int = 500,
    l2: float = 1e-4,
    seed: int = 0,
) -> TrainResult:
    """Full-batch gradient descent from zero; deterministic given inputs."""
    if lr <= 0:
        raise ValueError("lr must be > 0")
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    params = ModelParams(np.zeros(matrix.features.shape[1]), 0.0)
    losses = []
    for epoch in range(epochs):
        grad_theta, grad_bias = gradient(matrix, params, l2)
        params.theta = params.theta - lr * grad_theta
        params.bias = params.bias - lr * grad_bias
        current = loss(matrix, params, l2)
        if not np.isfinite(current):
            raise FloatingPointError(
                f"non-finite loss {current} at epoch {epoch} (lr={lr}, l2={l2})"
            )
        losses.append(current)
    return TrainResult(params, losses)


def build_features(
    rules, graphs, queries, labels, scorer: str = "binary", eval_budget: int = 1_000_000
) -> FeatureMatrix:
    """Feature matrix: one row per query, one column per rule.

    Binary features are rule-match indicators.  The reach scorer weights a
    match by the walk reach score of the query's target (capped at 1);
    queries without a target fall back to the binary value.
    """
    if scorer not in ("binary", "reach"):
        raise ValueError(f"unknown feature scorer {scorer!r}")
    rows = []
    for query in queries:
        graph = graphs[query.graph_index]
        row = []
        for rule in rules:
            matched = evaluate(rule, graph, query, budget=eval_budget)
            value = 1.0 if matched else 0.0
            if matched and scorer == "reach" and query.heads and query.tails:
                starts = {graph.entities.id_of(h) for h in query.heads}
                target = graph.entities.id_of(query.tails[0])
                value = min(
                    1.0, reach_probability(graph, starts, target, len(rule.body))
                )
            row.append(value)
        rows.append(row)
    features = np.array(rows, dtype=float) if rows else np.zeros((0, len(rules)))
    return FeatureMatrix(features, np.array(labels, dtype=float))


# -- model file --------------------------------------------------------------


def save_model(path, params: ModelParams, rules) -> None:
    """Plain-text model: `bias <v>` then one `signature<TAB><weight>` per rule."""
    if len(rules) != params.theta.shape[0]:
        raise ValueError("one weight per rule required")
    lines = [f"bias {params.bias:.17g}"]
    for rule, weight in zip(rules, params.theta):
        lines.append(f"{rule.signature}\t{weight:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> tuple[float, dict[str, float]]:
    """Returns (bias, signature -> weight)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("bias "):
        raise ValueError(f"{path}: model file must start with a bias line")
    bias = float(lines[0][5:])
    weights: dict[str, float] = {}
    for ln in lines[1:]:
        sig, _, w = ln.rpartition("\t")
        if not sig:
            raise ValueError(f"{path}: malformed model line {ln!r}")
        weights[sig] = float(w)
    return bias, weights
