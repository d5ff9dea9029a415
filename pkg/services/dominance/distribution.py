"""
Misclassification distribution p^v and transition matrix t^v.

p_j is the share of class j among misclassified inputs (the figure
estimator). The literal conditional estimator
p_j = P[f(x + v) = y_j | y(x) != y_j] is available with estimator="literal";
its entries do not sum to 1.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from services.core.errors import EmptyEvaluationSet
from .snapshots import as_snapshot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionMatrix:
    t: np.ndarray          # k x k, row i over inputs predicted i before the attack
    support: np.ndarray    # per-row sample counts

    @property
    def supported(self) -> np.ndarray:
        return self.support > 0

    def to_dict(self):
        return {"t": self.t.tolist(), "support": self.support.tolist()}


def misclass_distribution(source, ds=None, v=None, only_correct: bool = True,
                          estimator: str = "figure") -> np.ndarray:
    """
    p over a snapshot, or over (classifier, dataset, perturbation).

    Returns:
        k-vector p; zeros when nothing is misclassified

    Raises:
        EmptyEvaluationSet: no eligible input
    """
    snap = as_snapshot(source, ds, v)
    eligible = snap.eligible(only_correct)
    if not eligible.any():
        raise EmptyEvaluationSet("no eligible inputs for the misclassification distribution")
    fooled = eligible & snap.changed

    if estimator == "figure":
        total = int(fooled.sum())
        if total == 0:
            return np.zeros(snap.k)
        return np.bincount(snap.perturbed[fooled], minlength=snap.k) / total

    if estimator == "literal":
        p = np.zeros(snap.k)
        for j in range(snap.k):
            others = eligible & (snap.labels != j)
            if others.any():
                p[j] = np.sum(others & (snap.perturbed == j)) / others.sum()
        return p

    raise ValueError(f"unknown estimator '{estimator}', expected 'figure' or 'literal'")


def transition_matrix(source, ds=None, v=None, only_correct: bool = True) -> TransitionMatrix:
    """Row i: distribution of post-attack predictions of inputs predicted i pre-attack."""
    snap = as_snapshot(source, ds, v)
    eligible = snap.eligible(only_correct)
    counts = np.zeros((snap.k, snap.k))
    np.add.at(counts, (snap.clean[eligible], snap.perturbed[eligible]), 1.0)
    support = counts.sum(axis=1).astype(np.int64)
    t = np.zeros_like(counts)
    rows = support > 0
    t[rows] = counts[rows] / support[rows, None]
    if not rows.all():
        logger.debug(f"transition rows without support: {np.flatnonzero(~rows).tolist()}")
    return TransitionMatrix(t=t, support=support)


def dominant_class(clean: np.ndarray, perturbed: np.ndarray, k: int, fallback: Optional[int] = None) -> Optional[int]:
    """
    Class receiving the most misclassified inputs.

    Ties and the no-misclassification case return `fallback` (usually f(v)).
    """
    fooled = np.asarray(perturbed)[np.asarray(perturbed) != np.asarray(clean)]
    if fooled.size == 0:
        return fallback
    counts = np.bincount(fooled, minlength=k)
    top = np.flatnonzero(counts == counts.max())
    return int(top[0]) if top.size == 1 else fallback
