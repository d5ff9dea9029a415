"""
PredictionSnapshot: labels, clean predictions and perturbed predictions
of one dataset under one perturbation. Every counting function works on
a snapshot, so the classifier runs once per (dataset, perturbation).
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from services.core.errors import ShapeMismatch
from services.dataset.labeled import LabeledDataset
from services.model.classifier import BaseClassifier
from services.signal.config import Representation


@dataclass(frozen=True)
class PredictionSnapshot:
    labels: np.ndarray
    clean: np.ndarray
    perturbed: np.ndarray
    class_names: Tuple[str, ...]

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=np.int64) for a in (self.labels, self.clean, self.perturbed)]
        if not arrays[0].shape == arrays[1].shape == arrays[2].shape or arrays[0].ndim != 1:
            raise ShapeMismatch("labels, clean and perturbed predictions must be equal-length vectors")
        for name, arr in zip(("labels", "clean", "perturbed"), arrays):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def k(self) -> int:
        return len(self.class_names)

    def __len__(self) -> int:
        return int(self.labels.size)

    def eligible(self, only_correct: bool = True, excluded: Sequence[int] = ()) -> np.ndarray:
        """Mask of inputs that count: initially correct (optional) and not of an excluded class."""
        mask = self.clean == self.labels if only_correct else np.ones(len(self), dtype=bool)
        if len(excluded):
            mask &= ~np.isin(self.labels, np.asarray(list(excluded), dtype=np.int64))
        return mask

    @property
    def changed(self) -> np.ndarray:
        return self.perturbed != self.clean


def clean_predictions(c: BaseClassifier, ds: LabeledDataset) -> np.ndarray:
    return c.predict_batch(ds.waveforms)


def take_snapshot(c: BaseClassifier, ds: LabeledDataset, v, clean: Optional[np.ndarray] = None) -> PredictionSnapshot:
    """
    Predictions of ds with and without v.

    v is a waveform perturbation (added to every waveform) or an MFCC
    perturbation (added to every input's features); a bare array is
    taken as a waveform perturbation.
    """
    values = np.asarray(getattr(v, "values", v), dtype=np.float64)
    domain = Representation(getattr(v, "domain", Representation.WAVEFORM))
    if clean is None:
        clean = clean_predictions(c, ds)
    if domain is Representation.WAVEFORM:
        perturbed = c.predict_batch(ds.waveforms + values)
    else:
        perturbed = c.predict_features_batch(c.features_batch(ds.waveforms) + values)
    return PredictionSnapshot(ds.labels, clean, perturbed, ds.class_names)


def as_snapshot(source, ds: Optional[LabeledDataset] = None, v=None) -> PredictionSnapshot:
    """`source` itself if it is a snapshot, else take_snapshot(source, ds, v)."""
    if isinstance(source, PredictionSnapshot):
        return source
    if ds is None or v is None:
        raise TypeError("a classifier needs a dataset and a perturbation to take a snapshot")
    return take_snapshot(source, ds, v)
