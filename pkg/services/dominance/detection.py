"""
Attractor and dominant class detection.

- (i, a) is an attractor pair when t[i, a] >= alpha, i != a
- b is dominant by mass when p_b >= beta
- b is dominant by attraction when it attracts at least a zeta share
  of the other k - 1 classes
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from services.core.errors import ThresholdTooLow
from .distribution import TransitionMatrix, misclass_distribution, transition_matrix
from .fooling import fooling_rate_variants

DEFAULT_THRESHOLD = 1.0 / 3.0


@dataclass(frozen=True)
class DominanceReport:
    class_names: Tuple[str, ...]
    p: np.ndarray
    transition: TransitionMatrix
    attractor_pairs: Tuple[Tuple[int, int], ...]
    dominant_by_mass: Tuple[int, ...]
    dominant_by_attraction: Tuple[int, ...]
    thresholds: Dict[str, float]
    fooling_rates: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def has_dominant(self) -> bool:
        return bool(self.dominant_by_mass or self.dominant_by_attraction)

    def to_dict(self) -> Dict:
        names = self.class_names
        return {
            "class_names": list(names),
            "p": self.p.tolist(),
            "transition": self.transition.to_dict(),
            "attractor_pairs": [[names[i], names[a]] for i, a in self.attractor_pairs],
            "dominant_by_mass": [names[b] for b in self.dominant_by_mass],
            "dominant_by_attraction": [names[b] for b in self.dominant_by_attraction],
            "thresholds": dict(self.thresholds),
            "fooling_rates": dict(self.fooling_rates),
        }


def detect(p: np.ndarray, t: Union[TransitionMatrix, np.ndarray], alpha: float = DEFAULT_THRESHOLD,
           beta: float = DEFAULT_THRESHOLD, zeta: float = DEFAULT_THRESHOLD,
           class_names: Optional[Sequence[str]] = None,
           fooling_rates: Optional[Dict[str, Optional[float]]] = None) -> DominanceReport:
    """
    Raises:
        ThresholdTooLow: a threshold is <= 1/(k-1)
    """
    p = np.asarray(p, dtype=np.float64)
    transition = t if isinstance(t, TransitionMatrix) else TransitionMatrix(
        t=np.asarray(t, dtype=np.float64), support=np.ones(len(p), dtype=np.int64))
    k = p.size
    floor = 1.0 / (k - 1)
    for name, value in (("alpha", alpha), ("beta", beta), ("zeta", zeta)):
        if value <= floor:
            raise ThresholdTooLow(f"{name}={value} must exceed 1/(k-1)={floor:.6f}", threshold=name)

    hits = transition.t >= alpha
    np.fill_diagonal(hits, False)
    pairs = tuple((int(i), int(a)) for i, a in zip(*np.nonzero(hits)))
    by_mass = tuple(int(b) for b in np.flatnonzero(p >= beta))
    by_attraction = tuple(int(b) for b in np.flatnonzero(hits.sum(axis=0) / (k - 1) >= zeta))

    return DominanceReport(
        class_names=tuple(class_names) if class_names is not None else tuple(str(i) for i in range(k)),
        p=p,
        transition=transition,
        attractor_pairs=pairs,
        dominant_by_mass=by_mass,
        dominant_by_attraction=by_attraction,
        thresholds={"alpha": alpha, "beta": beta, "zeta": zeta},
        fooling_rates=dict(fooling_rates or {}),
    )


def dominance_report(snap, alpha: float = DEFAULT_THRESHOLD, beta: float = DEFAULT_THRESHOLD,
                     zeta: float = DEFAULT_THRESHOLD, only_correct: bool = True,
                     estimator: str = "figure") -> DominanceReport:
    """p, t, detected classes and the three fooling-rate variants of one snapshot."""
    p = misclass_distribution(snap, only_correct=only_correct, estimator=estimator)
    t = transition_matrix(snap, only_correct=only_correct)
    report = detect(p, t, alpha, beta, zeta, class_names=snap.class_names)
    dominant = set(report.dominant_by_mass) | set(report.dominant_by_attraction)
    rates = fooling_rate_variants(snap, dominant, only_correct)
    return replace(report, fooling_rates=rates)
