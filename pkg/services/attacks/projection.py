"""
Projection onto the l_p ball of radius xi centered at 0 (p in {2, inf}).
"""

from typing import Union

import numpy as np

from services.numeric.sampling import quantize_f32
from .perturbation import Perturbation, norm_order

# relative slack under which an l2 point already counts as inside the ball
L2_SLACK = 1e-12

ArrayOrPerturbation = Union[np.ndarray, Perturbation]


def _project_values(values: np.ndarray, p: float, xi: float) -> np.ndarray:
    if np.isinf(p):
        return np.clip(values, -xi, xi)
    norm = float(np.linalg.norm(values))
    if norm <= xi * (1.0 + L2_SLACK):
        return values.copy()
    return values * (xi / norm)


def project_lp(v: ArrayOrPerturbation, p, xi: float) -> ArrayOrPerturbation:
    """
    Euclidean-nearest point of the l_p ball.

    p=2: v * min(1, xi / ||v||_2), p=inf: elementwise clamp to [-xi, xi].
    Returns the same type it was given.
    """
    if xi <= 0:
        raise ValueError(f"projection radius must be positive, got {xi}")
    order = norm_order(p)
    if isinstance(v, Perturbation):
        return v.with_values(_project_values(v.values, order, xi))
    return _project_values(np.asarray(v, dtype=np.float64), order, xi)


def quantize_into_ball(values: np.ndarray, p, xi: float) -> np.ndarray:
    """
    float32-representable version of a projected vector that still lies in the ball.

    Rounding to float32 can push a boundary point out by a few ulps; the
    vector is shrunk by 2^-20 steps until it is feasible again.
    """
    order = norm_order(p)
    q = quantize_f32(_project_values(np.asarray(values, dtype=np.float64), order, xi))
    for _ in range(64):
        size = np.max(np.abs(q)) if np.isinf(order) else np.linalg.norm(q)
        if size <= xi:
            break
        q = quantize_f32(q * (1.0 - 2.0 ** -20))
    return q
