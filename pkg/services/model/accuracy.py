"""
Clean accuracy per class, in the per-class table layout
(class, samples, accuracy %) with a trailing mean row.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from services.core.errors import EmptyEvaluationSet
from services.dataset.labeled import LabeledDataset
from .classifier import BaseClassifier


@dataclass(frozen=True)
class AccuracyReport:
    class_names: Tuple[str, ...]
    correct: np.ndarray
    totals: np.ndarray

    @property
    def per_class(self) -> np.ndarray:
        """Accuracy in [0, 1] per class; NaN for classes without samples."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.totals > 0, self.correct / np.maximum(self.totals, 1), np.nan)

    @property
    def mean_per_class(self) -> float:
        return float(np.nanmean(self.per_class))

    @property
    def overall(self) -> float:
        return float(self.correct.sum() / self.totals.sum())

    def rows(self) -> List[Dict]:
        rows = [
            {"class": name, "samples": int(total),
             "accuracy_pct": None if total == 0 else 100.0 * float(acc)}
            for name, total, acc in zip(self.class_names, self.totals, self.per_class)
        ]
        rows.append({"class": "mean", "samples": int(self.totals.sum()),
                     "accuracy_pct": 100.0 * self.mean_per_class})
        return rows

    def to_dict(self) -> Dict:
        return {
            "rows": self.rows(),
            "mean_per_class": self.mean_per_class,
            "overall": self.overall,
        }


def accuracy_from_predictions(predictions: Sequence[int], labels: Sequence[int],
                              class_names: Sequence[str]) -> AccuracyReport:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise EmptyEvaluationSet("accuracy needs at least one sample")
    k = len(class_names)
    totals = np.bincount(labels, minlength=k)
    correct = np.bincount(labels[predictions == labels], minlength=k)
    return AccuracyReport(class_names=tuple(class_names), correct=correct, totals=totals)


def accuracy(c: BaseClassifier, ds: LabeledDataset) -> AccuracyReport:
    if len(ds) == 0:
        raise EmptyEvaluationSet("accuracy needs at least one sample")
    return accuracy_from_predictions(c.predict_batch(ds.waveforms), ds.labels, ds.class_names)
