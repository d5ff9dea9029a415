"""
Correlation factors tracked while a universal perturbation grows:

    F1(v) = P[f(x) != f(x + v)]
    F2(v) = fraction of inputs predicted y_b under v
    F3(v) = f_b(v), the confidence that v itself belongs to y_b
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from services.core.errors import ZeroVariance
from services.dataset.labeled import LabeledDataset
from services.model.classifier import BaseClassifier
from .distribution import dominant_class
from .snapshots import take_snapshot

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Factors:
    """
    F1 counts prediction changes over every input of the dataset, including
    inputs the clean model already gets wrong. The dominance tables use
    fooling_rate(only_correct=True), so the two agree only on a dataset the
    clean model classifies perfectly.
    """

    f1: float
    f2: float
    f3: float
    y_b: int

    def to_dict(self) -> Dict:
        return {"F1": self.f1, "F2": self.f2, "F3": self.f3, "y_b": self.y_b}


def factors(c: BaseClassifier, ds: LabeledDataset, v, y_b: Optional[int] = None,
            clean: Optional[np.ndarray] = None) -> Factors:
    """F1, F2, F3 of v on ds; y_b defaults to the dominant class, then to f(v)."""
    values = np.asarray(getattr(v, "values", v), dtype=np.float64)
    snap = take_snapshot(c, ds, values, clean)
    if y_b is None:
        y_b = dominant_class(snap.clean, snap.perturbed, snap.k, fallback=c.predict(values))
    return Factors(
        f1=float(np.mean(snap.changed)),
        f2=float(np.mean(snap.perturbed == y_b)),
        f3=float(c.confidences(values)[y_b]),
        y_b=int(y_b),
    )


def pearson(a, b) -> float:
    """
    Sample Pearson correlation coefficient.

    Raises:
        ZeroVariance: either series is constant
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError(f"pearson needs two equal-length series of length >= 2, got {a.shape} and {b.shape}")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ZeroVariance("pearson is undefined for a constant series")
    return float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))


def factor_correlations(trace, y_b: Optional[int] = None, first_pass_only: bool = True) -> Dict:
    """
    Pearson coefficients of the pairs (F1, F3), (F1, F2), (F2, F3) over the
    accepted updates of a trace, plus their mean. Undefined pairs are None.
    """
    series = trace.series(y_b, first_pass_only=first_pass_only)
    out: Dict[str, Optional[float]] = {}
    for x, y in (("F1", "F3"), ("F1", "F2"), ("F2", "F3")):
        try:
            out[f"{x}_{y}"] = pearson(series[x], series[y])
        except (ZeroVariance, ValueError) as e:
            logger.warning(f"⚠️ corr({x}, {y}) undefined: {e}")
            out[f"{x}_{y}"] = None
    defined = [value for value in out.values() if value is not None]
    out["mean"] = float(np.mean(defined)) if defined else None
    out["points"] = int(series["F1"].size)
    return out
