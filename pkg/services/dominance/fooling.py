"""
Fooling rates: the fraction of eligible inputs whose prediction changes
under v. Eligible means initially correct (unless disabled) and not of an
excluded class.
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from services.core.errors import EmptyAfterExclusion
from .snapshots import PredictionSnapshot, as_snapshot

logger = logging.getLogger(__name__)

VARIANTS = ("all", "excl_dominant", "excl_dominant_and_silence")
SILENCE = "silence"


def fooling_counts(source, ds=None, v=None, excluded: Sequence[int] = (),
                   only_correct: bool = True) -> Tuple[int, int]:
    """(changed, eligible) input counts."""
    snap = as_snapshot(source, ds, v)
    eligible = snap.eligible(only_correct, excluded)
    return int(np.sum(eligible & snap.changed)), int(eligible.sum())


def fooling_rate(source, ds=None, v=None, excluded: Sequence[int] = (), only_correct: bool = True) -> float:
    """
    Fooling rate of a snapshot, or of (classifier, dataset, perturbation).

    Raises:
        EmptyAfterExclusion: no eligible input is left
    """
    changed, eligible = fooling_counts(source, ds, v, excluded, only_correct)
    if eligible == 0:
        raise EmptyAfterExclusion(f"no eligible inputs after excluding classes {sorted(excluded)}")
    return changed / eligible


def per_class_fooling_rate(snap: PredictionSnapshot, only_correct: bool = True) -> np.ndarray:
    """Fooling rate of the eligible inputs of each class (NaN for classes without any)."""
    eligible = snap.eligible(only_correct)
    rates = np.full(snap.k, np.nan)
    for j in range(snap.k):
        members = eligible & (snap.labels == j)
        if members.any():
            rates[j] = float(np.mean(snap.changed[members]))
    return rates


def fooling_rate_variants(snap: PredictionSnapshot, dominant: Iterable[int],
                          only_correct: bool = True) -> Dict[str, Optional[float]]:
    """
    Fooling rate over all inputs, without the dominant classes, and
    without the dominant classes and silence. A variant that excludes
    every input is reported as None.
    """
    dominant = sorted({int(b) for b in dominant})
    excluded = {
        "all": [],
        "excl_dominant": dominant,
        "excl_dominant_and_silence": sorted(set(dominant) | (
            {snap.class_names.index(SILENCE)} if SILENCE in snap.class_names else set())),
    }
    rates = {}
    for variant in VARIANTS:
        try:
            rates[variant] = fooling_rate(snap, excluded=excluded[variant], only_correct=only_correct)
        except EmptyAfterExclusion:
            logger.warning(f"⚠️ Fooling rate '{variant}' undefined: every input excluded")
            rates[variant] = None
    return rates


def aggregate_fooling_table(rows: List[Dict[str, Optional[float]]]) -> Dict[str, Dict[str, Optional[float]]]:
    """Mean and max of each variant over a set of perturbations (None entries skipped)."""
    table = {}
    for variant in VARIANTS:
        values = [row[variant] for row in rows if row.get(variant) is not None]
        table[variant] = {
            "mean": float(np.mean(values)) if values else None,
            "max": float(np.max(values)) if values else None,
            "count": len(values),
        }
    return table
