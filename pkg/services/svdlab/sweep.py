"""
Subspace sweep: fooling rate of random MFCC perturbations drawn from the
span of the first N right singular vectors, at several l2 norms.

One unit direction is drawn per (N, trial) with coefficients uniform on
the N-sphere; every scale reuses it, so s_f = 0 gives exactly zero.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.dataset.labeled import LabeledDataset
from services.dominance.fooling import fooling_rate
from services.dominance.snapshots import PredictionSnapshot
from services.model.classifier import BaseClassifier
from services.numeric.sampling import rng, sample_unit_sphere

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubspaceSweepResult:
    ns: Tuple[int, ...]
    scales: Tuple[float, ...]
    fooling_rates: np.ndarray    # len(ns) x len(scales), mean over trials
    trials: int
    seed: int

    def rows(self) -> List[Dict]:
        return [
            {"N": n, "scale": s, "fooling_rate": float(self.fooling_rates[i, j])}
            for i, n in enumerate(self.ns)
            for j, s in enumerate(self.scales)
        ]


def sample_in_span(V: np.ndarray, n: int, stream: np.random.Generator) -> np.ndarray:
    """Unit vector V[:, :n] @ u with u uniform on the unit sphere of R^n."""
    return V[:, :n] @ sample_unit_sphere(stream, n)


def subspace_sweep(c: BaseClassifier, test_ds: LabeledDataset, V: np.ndarray, ns: Sequence[int],
                   scales: Sequence[float], trials: int, seed: int, workers: int = 1,
                   clean: Optional[np.ndarray] = None) -> SubspaceSweepResult:
    """
    Args:
        V: right singular vectors of an MFCC perturbation matrix (columns)
    """
    if max(ns) > V.shape[1]:
        raise ValueError(f"N={max(ns)} exceeds the {V.shape[1]} available singular vectors")
    feats = c.features_batch(test_ds.waveforms)
    if V.shape[0] != int(np.prod(feats.shape[1:])):
        raise ValueError(f"singular vectors have dimension {V.shape[0]}, features {feats.shape[1:]}")
    if clean is None:
        clean = c.predict_features_batch(feats)

    def cell(job) -> np.ndarray:
        i, trial = job
        direction = sample_in_span(V, ns[i], rng([seed, ns[i], trial])).reshape(feats.shape[1:])
        rates = np.zeros(len(scales))
        for j, s in enumerate(scales):
            perturbed = c.predict_features_batch(feats + s * direction)
            snap = PredictionSnapshot(test_ds.labels, clean, perturbed, test_ds.class_names)
            rates[j] = fooling_rate(snap)
        return rates

    jobs = [(i, trial) for i in range(len(ns)) for trial in range(trials)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(cell, jobs))

    grid = np.zeros((len(ns), len(scales)))
    for (i, _), rates in zip(jobs, results):
        grid[i] += rates
    grid /= max(trials, 1)
    logger.info(f"🧭 Subspace sweep done: Ns={list(ns)}, trials={trials}, max FR={grid.max() if grid.size else 0.0:.4f}")
    return SubspaceSweepResult(ns=tuple(int(n) for n in ns), scales=tuple(float(s) for s in scales),
                               fooling_rates=grid, trials=trials, seed=seed)
