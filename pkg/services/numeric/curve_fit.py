"""
Exponential decay fit y = rho * exp(-x * lambda) + omega.

Both axes are scaled to [0, 1] before fitting, so fitted parameters are
comparable across singular-value series of different size and scale.
The fit is a coarse log-spaced grid over lambda (rho, omega solved in
closed form at each lambda) followed by Gauss-Newton refinement of all
three parameters with step halving.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from services.core.errors import DegenerateSeries

logger = logging.getLogger(__name__)

LAMBDA_GRID = np.logspace(-3, 3, 64)
MAX_GN_ITERS = 100
MAX_HALVINGS = 40


@dataclass(frozen=True)
class ExpFit:
    rho: float
    lambda_: float
    omega: float
    rmse: float

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.rho * np.exp(-np.asarray(x) * self.lambda_) + self.omega

    def to_dict(self) -> dict:
        return {"rho": self.rho, "lambda": self.lambda_, "omega": self.omega, "rmse": self.rmse}


def scale_series(values) -> Tuple[np.ndarray, np.ndarray]:
    """Affinely map the index axis and the value axis to [0, 1]."""
    y = np.asarray(values, dtype=np.float64)
    if y.ndim != 1 or y.size < 3:
        raise ValueError(f"fit_exp_decay needs a 1-D series of length >= 3, got shape {y.shape}")
    lo, hi = float(np.min(y)), float(np.max(y))
    if hi == lo:
        raise DegenerateSeries("cannot fit a constant series")
    x = np.linspace(0.0, 1.0, y.size)
    return x, (y - lo) / (hi - lo)


def _linear_solve(x: np.ndarray, y: np.ndarray, lam: float) -> Tuple[float, float, float]:
    """Least-squares rho, omega at fixed lambda; returns (rho, omega, sse)."""
    basis = np.column_stack([np.exp(-x * lam), np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    resid = basis @ coef - y
    return float(coef[0]), float(coef[1]), float(resid @ resid)


def _sse(x, y, params) -> float:
    rho, lam, omega = params
    resid = rho * np.exp(-x * lam) + omega - y
    return float(resid @ resid)


def fit_exp_decay(values) -> ExpFit:
    """
    Fit rho * exp(-x * lambda) + omega to a descending series.

    Args:
        values: series (e.g. sorted singular values), length >= 3

    Returns:
        ExpFit in scaled coordinates

    Raises:
        DegenerateSeries: constant input
    """
    x, y = scale_series(values)

    best = None
    for lam in LAMBDA_GRID:
        rho, omega, sse = _linear_solve(x, y, lam)
        if best is None or sse < best[3]:
            best = (rho, float(lam), omega, sse)

    params = np.array(best[:3])
    sse = best[3]

    for _ in range(MAX_GN_ITERS):
        rho, lam, omega = params
        e = np.exp(-x * lam)
        resid = rho * e + omega - y
        J = np.column_stack([e, -rho * x * e, np.ones_like(x)])
        step, *_ = np.linalg.lstsq(J, -resid, rcond=None)

        alpha = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            candidate = params + alpha * step
            cand_sse = _sse(x, y, candidate)
            if np.all(np.isfinite(candidate)) and cand_sse < sse:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        improvement = sse - cand_sse
        params, sse = candidate, cand_sse
        if improvement <= 1e-15 * max(sse, 1e-30) or np.max(np.abs(alpha * step)) < 1e-12:
            break

    rho, lam, omega = (float(p) for p in params)
    fit = ExpFit(rho=rho, lambda_=lam, omega=omega, rmse=float(np.sqrt(sse / y.size)))
    logger.debug(f"Exp fit: rho={rho:.4f}, lambda={lam:.4f}, omega={omega:.4f}, rmse={fit.rmse:.2e}")
    return fit
