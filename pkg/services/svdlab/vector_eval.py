"""
Per-singular-vector evaluation.

Every singular vector, scaled by each factor (negative factors flip its
sign), is added to the MFCC features of the test inputs. Misclassified
inputs are attributed to the two dominant classes or to "others".
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.dataset.labeled import LabeledDataset
from services.dominance.fooling import fooling_rate
from services.dominance.snapshots import PredictionSnapshot
from services.model.classifier import BaseClassifier

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SingularVectorEval:
    scales: Tuple[float, ...]
    fooling_rates: np.ndarray      # count x len(scales)
    counts: np.ndarray             # count x len(scales) x 3: [dominant 1, dominant 2, others]
    class_counts: np.ndarray       # count x len(scales) x k misclassified counts per predicted class
    dominant_pair: Tuple[int, int]

    @property
    def frequencies(self) -> np.ndarray:
        """counts normalized over misclassified inputs (zeros where none)."""
        totals = self.counts.sum(axis=-1, keepdims=True)
        return np.divide(self.counts, totals, out=np.zeros_like(self.counts, dtype=np.float64),
                         where=totals > 0)

    def dominant_mass(self) -> np.ndarray:
        """Frequency share of both dominant classes per vector and scale."""
        return self.frequencies[..., 0] + self.frequencies[..., 1]

    def rows(self, class_names: Sequence[str]) -> List[Dict]:
        d1, d2 = (class_names[i] for i in self.dominant_pair)
        freqs = self.frequencies
        return [
            {"vector": v + 1, "scale": s, "fooling_rate": float(self.fooling_rates[v, j]),
             f"freq_{d1}": float(freqs[v, j, 0]), f"freq_{d2}": float(freqs[v, j, 1]),
             "freq_others": float(freqs[v, j, 2]), "misclassified": int(self.counts[v, j].sum())}
            for v in range(self.fooling_rates.shape[0])
            for j, s in enumerate(self.scales)
        ]


def top_two(class_counts: np.ndarray) -> Tuple[int, int]:
    """Two classes with the most misclassified inputs (ties to the lowest index)."""
    totals = class_counts.reshape(-1, class_counts.shape[-1]).sum(axis=0)
    order = np.argsort(-totals, kind="stable")
    return int(order[0]), int(order[1])


def singular_vector_eval(c: BaseClassifier, test_ds: LabeledDataset, V: np.ndarray, count: int,
                         scales: Sequence[float], dominant_pair: Optional[Tuple[int, int]] = None,
                         clean: Optional[np.ndarray] = None) -> SingularVectorEval:
    """
    Args:
        dominant_pair: classes to attribute against; by default the two
            classes receiving the most misclassified inputs over all vectors
    """
    if count > V.shape[1]:
        raise ValueError(f"count={count} exceeds the {V.shape[1]} available singular vectors")
    feats = c.features_batch(test_ds.waveforms)
    if clean is None:
        clean = c.predict_features_batch(feats)
    k = test_ds.class_count

    rates = np.zeros((count, len(scales)))
    class_counts = np.zeros((count, len(scales), k), dtype=np.int64)
    for v in range(count):
        direction = V[:, v].reshape(feats.shape[1:])
        for j, s in enumerate(scales):
            perturbed = c.predict_features_batch(feats + s * direction)
            snap = PredictionSnapshot(test_ds.labels, clean, perturbed, test_ds.class_names)
            rates[v, j] = fooling_rate(snap)
            fooled = snap.eligible() & snap.changed
            class_counts[v, j] = np.bincount(perturbed[fooled], minlength=k)

    pair = tuple(int(i) for i in dominant_pair) if dominant_pair is not None else top_two(class_counts)
    others = class_counts.sum(axis=-1) - class_counts[..., pair[0]] - class_counts[..., pair[1]]
    counts = np.stack([class_counts[..., pair[0]], class_counts[..., pair[1]], others], axis=-1)
    logger.info(f"🔎 Evaluated {count} singular vectors at scales {list(scales)}; dominant pair={pair}")
    return SingularVectorEval(scales=tuple(float(s) for s in scales), fooling_rates=rates,
                              counts=counts, class_counts=class_counts, dominant_pair=pair)
