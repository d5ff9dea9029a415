"""
DeepFool with a restricted class set.

Linearize the classifier at x + r, step to the nearest allowed boundary
and repeat while x + (1 + overshoot) r is still classified as the source
class or as a restricted class. Gradients are taken on pre-softmax logits.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from services.core.errors import AlreadyFooled, InvalidConfig
from services.model.classifier import BaseClassifier
from services.model.gradients import class_gradients
from services.signal.config import Representation
from .perturbation import Perturbation, Provenance

logger = logging.getLogger(__name__)

OVERSHOOT = 0.02
MAX_ITER = 50


@dataclass(frozen=True)
class DeepFoolResult:
    perturbation: Perturbation   # (1 + overshoot) * raw
    raw: np.ndarray              # accumulated r before overshoot
    converged: bool
    iterations: int
    source_class: int
    final_class: int             # predicted class of x + perturbation

    @property
    def raw_norm(self) -> float:
        return float(np.linalg.norm(self.raw))


def deepfool(x, c: BaseClassifier, restricted: Iterable[int] = (), label: Optional[int] = None,
             max_iter: int = MAX_ITER, overshoot: float = OVERSHOOT) -> DeepFoolResult:
    """
    Minimal perturbation moving x out of its class and out of `restricted`.

    Args:
        x: waveform samples
        restricted: classes the result may not land in
        label: ground-truth class of x; defaults to the current prediction

    Returns:
        DeepFoolResult; converged=False when max_iter steps were not enough

    Raises:
        AlreadyFooled: x is not classified as `label`
        InvalidConfig: restricted plus the source class cover every class
    """
    x = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    source = c.predict(x)
    if label is not None and source != label:
        raise AlreadyFooled(f"input is classified as {source}, not its label {label}",
                            predicted=source, label=label)

    forbidden = {source} | {int(r) for r in restricted}
    allowed = [j for j in range(c.class_count) if j not in forbidden]
    if not allowed:
        raise InvalidConfig("restricted classes leave no class to move to")

    r = np.zeros_like(x)
    current = source
    iterations = 0
    while current in forbidden and iterations < max_iter:
        scores, grads = class_gradients(c, x + r, [source] + allowed, space="logits")
        f_prime = scores[allowed] - scores[source]
        w_prime = grads[1:] - grads[0]
        w_norms = np.linalg.norm(w_prime, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            distances = np.where(w_norms > 0, np.abs(f_prime) / w_norms, np.inf)
        if not np.isfinite(distances).any():
            break
        l = int(np.argmin(distances))
        r = r + (np.abs(f_prime[l]) / w_norms[l] ** 2) * w_prime[l]
        iterations += 1
        current = c.predict(x + (1.0 + overshoot) * r)

    converged = current not in forbidden
    if not converged:
        logger.warning(f"⚠️ DeepFool did not converge after {iterations} steps (source={source})")

    perturbation = Perturbation(
        (1.0 + overshoot) * r, Representation.WAVEFORM, Provenance.DEEPFOOL,
        {"converged": converged, "iterations": iterations, "source_class": source,
         "restricted": sorted(forbidden - {source})},
    )
    return DeepFoolResult(
        perturbation=perturbation, raw=r, converged=converged, iterations=iterations,
        source_class=source, final_class=current,
    )
