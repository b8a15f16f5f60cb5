"""Pareto dominance, nondominated filtering and the Pareto-front GP classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gp


def dominates(y1, y2) -> bool:
    """True if ``y1`` is no worse than ``y2`` everywhere and better somewhere."""
    a = np.asarray(y1, dtype=float)
    b = np.asarray(y2, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"cannot compare objective vectors of shapes {a.shape} and {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def extract_front(objectives) -> np.ndarray:
    """Label each row 1 if no other row dominates it, else 0.

    Exact duplicates never dominate each other, so tied nondominated
    vectors are all labeled 1.
    """
    y = np.asarray(objectives, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n = y.shape[0]
    if n == 0:
        raise ValueError("cannot extract the front of an empty set")
    if y.shape[1] == 2:
        return _front_2d(y)
    labels = np.ones(n, dtype=int)
    # chunked to bound the (chunk, n, s) comparison tensor
    chunk = max(1, 2_000_000 // max(n * y.shape[1], 1))
    for start in range(0, n, chunk):
        block = y[start : start + chunk]
        le = np.all(y[None, :, :] <= block[:, None, :], axis=2)
        lt = np.any(y[None, :, :] < block[:, None, :], axis=2)
        labels[start : start + chunk] = ~np.any(le & lt, axis=1)
    return labels


def _front_2d(y: np.ndarray) -> np.ndarray:
    """Sort-based labels for two objectives (same result as the pairwise test)."""
    order = np.lexsort((y[:, 1], y[:, 0]))
    a, b = y[order, 0], y[order, 1]
    n = a.size
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    group_start = np.maximum.accumulate(np.where(new_group, np.arange(n), 0))
    # prefix_min[k] = min(b[:k]), i.e. over strictly lexicographically smaller points
    prefix_min = np.concatenate(([np.inf], np.minimum.accumulate(b)))
    dominated = prefix_min[group_start] <= b
    labels = np.empty(n, dtype=int)
    labels[order] = ~dominated
    return labels


def nondominated(objectives) -> np.ndarray:
    """Rows of ``objectives`` that are not dominated by any other row."""
    y = np.asarray(objectives, dtype=float)
    return y[extract_front(y) == 1]


def front_labels(feasible_mask, objectives) -> np.ndarray:
    """Pareto labels over all records; infeasible records are labeled 0.

    ``objectives`` holds one row per record; rows of infeasible records
    are ignored.
    """
    mask = np.asarray(feasible_mask, dtype=bool)
    labels = np.zeros(mask.shape[0], dtype=int)
    if mask.any():
        y = np.asarray(objectives, dtype=float)
        labels[mask] = extract_front(y[mask])
    return labels


@dataclass(frozen=True)
class ParetoClassifier:
    """GP regression on {0, 1} Pareto labels, read as a clipped probability."""

    model: gp.GpModel
    labels: np.ndarray

    def predict(self, x) -> tuple[np.ndarray, np.ndarray]:
        mean, var = gp.predict_batch(self.model, x)
        return np.clip(mean, 0.0, 1.0), var


def fit_pareto_classifier(
    inputs,
    feasible_mask,
    objectives,
    kernel_kind=gp.KernelKind.MATERN52,
    config: gp.FitConfig | None = None,
) -> ParetoClassifier:
    mask = np.asarray(feasible_mask, dtype=bool)
    if not mask.any():
        raise ValueError("the Pareto classifier needs at least one feasible point")
    labels = front_labels(mask, objectives)
    model = gp.fit(inputs, labels.astype(float), kernel_kind, config)
    return ParetoClassifier(model, labels)


def pareto_probability(clf: ParetoClassifier, x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.shape != (clf.model.dim,):
        raise ValueError(f"query must have shape ({clf.model.dim},), got {x.shape}")
    prob, var = clf.predict(x)
    return float(prob[0]), float(var[0])
