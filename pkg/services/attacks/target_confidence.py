"""
Target-confidence attack: projected gradient ascent on the softmax
confidence f_t(v) of a class, with v itself classified as an input.

Trials start from uniform noise in [-1e-3, 1e-3], take fixed l2-length
steps along the normalized gradient and return the best iterate seen.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from services.model.classifier import BaseClassifier
from services.model.gradients import class_gradients
from services.numeric.sampling import SeedLike, rng
from services.signal.config import Representation
from .perturbation import Perturbation, Provenance
from .projection import project_lp, quantize_into_ball

logger = logging.getLogger(__name__)

INIT_RANGE = 1e-3


@dataclass(frozen=True)
class TargetAttackResult:
    perturbation: Perturbation
    target: int
    best_objective: float
    history: Tuple[float, ...]   # best-so-far objective after each iteration
    predicted_class: int         # f(v) of the stored perturbation

    @property
    def success(self) -> bool:
        return self.predicted_class == self.target


def target_confidence_attack(c: BaseClassifier, y_t: int, xi: float, iters: int = 100,
                             step: float = 0.01, seed: SeedLike = 0) -> TargetAttackResult:
    """
    Maximize f_{y_t}(v) subject to ||v||_2 <= xi.

    Each iteration takes a normalized step v += step * g / ||g|| on the softmax
    confidence and projects back onto the ball, so `step` is a length in
    waveform units rather than a learning rate. A zero gradient ends the ascent.

    Returns:
        TargetAttackResult whose perturbation is the best-so-far iterate
    """
    stream = rng(seed)
    v = project_lp(stream.uniform(-INIT_RANGE, INIT_RANGE, c.input_len), 2, xi)
    best_v, best = v, float(c.confidences(v)[y_t])
    history = [best]

    for _ in range(iters):
        scores, grads = class_gradients(c, v, [y_t], space="probs")
        if scores[y_t] > best:
            best_v, best = v, float(scores[y_t])
        g = grads[0]
        g_norm = np.linalg.norm(g)
        if g_norm == 0.0:
            history.append(best)
            break
        v = project_lp(v + step * g / g_norm, 2, xi)
        history.append(max(best, float(c.confidences(v)[y_t])))
    final = float(c.confidences(v)[y_t])
    if final > best:
        best_v, best = v, final

    stored = quantize_into_ball(best_v, 2, xi)
    perturbation = Perturbation(
        stored, Representation.WAVEFORM, Provenance.TARGET_CONF,
        {"target": int(y_t), "xi": xi, "iters": iters, "step": step,
         "seed": list(seed) if isinstance(seed, (list, tuple)) else seed},
    )
    predicted = c.predict(stored)
    return TargetAttackResult(
        perturbation=perturbation, target=int(y_t), best_objective=best,
        history=tuple(history), predicted_class=predicted,
    )


def run_target_trials(c: BaseClassifier, targets: Sequence[int], xi: float, iters: int,
                      step: float, trials: int, seed: int, workers: int = 1) -> List[TargetAttackResult]:
    """
    `trials` seeded attacks per target class, run in a thread pool.

    Trial t of target y uses seed (seed, y, t); results come back in
    (target, trial) order whatever the worker count.
    """
    jobs = [(y, t) for y in targets for t in range(trials)]
    logger.info(f"🎯 Target attack: targets={list(targets)}, trials={trials}, xi={xi}, workers={workers}")

    def run(job):
        y, t = job
        return target_confidence_attack(c, y, xi, iters=iters, step=step, seed=(seed, y, t))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, jobs))

    for y in targets:
        wins = sum(r.success for r in results if r.target == y)
        logger.info(f"  target {y}: f(v)=target in {wins}/{trials} trials")
    return results
