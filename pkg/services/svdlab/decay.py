"""
Singular-value decay of perturbation matrices: thin SVD plus an
exponential fit of the sigma series scaled to [0, 1].
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from services.numeric.curve_fit import ExpFit, fit_exp_decay, scale_series
from services.numeric.svd import SvdResult, thin_svd
from .matrices import PerturbationMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayEntry:
    matrix: PerturbationMatrix
    svd: SvdResult
    fit: ExpFit

    @property
    def name(self) -> str:
        return self.matrix.name

    @property
    def sigma(self) -> np.ndarray:
        return self.svd.sigma

    def scaled_series(self):
        """(x, y) of the sigma series on the [0, 1] axes the fit uses."""
        return scale_series(self.sigma)

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "kind": self.matrix.kind.value,
            "representation": self.matrix.representation.value,
            "rows": int(self.matrix.rows.shape[0]),
            "dim": int(self.matrix.rows.shape[1]),
            **self.fit.to_dict(),
        }


def decay_report(matrices: Sequence[PerturbationMatrix]) -> List[DecayEntry]:
    entries = []
    for matrix in matrices:
        svd = thin_svd(matrix.rows)
        fit = fit_exp_decay(svd.sigma)
        logger.info(f"📉 {matrix.name}: sigma1={svd.sigma[0]:.4f}, lambda={fit.lambda_:.4f}")
        entries.append(DecayEntry(matrix=matrix, svd=svd, fit=fit))
    return entries


def lambda_table(entries: Sequence[DecayEntry]) -> Dict[str, float]:
    return {entry.name: entry.fit.lambda_ for entry in entries}
