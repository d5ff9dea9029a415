"""
UAP-HC: universal perturbation by accumulating DeepFool steps with hill climbing.

Per pass the training inputs are visited in a seeded shuffled order. For
every input that v does not fool yet, DeepFool (with the restricted set)
proposes dv at x + v, v + dv is projected onto the l_p ball and the
candidate is accepted only if the training fooling rate strictly rises
and the input's perturbed class is not restricted. The attack stops once
the fooling rate reaches 1 - delta or after i_max passes.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from services.core.errors import InvalidConfig
from services.dataset.labeled import LabeledDataset
from services.dominance.distribution import dominant_class
from services.model.classifier import BaseClassifier
from services.numeric.sampling import rng
from services.signal.config import Representation
from .deepfool import MAX_ITER, OVERSHOOT, deepfool
from .perturbation import Perturbation, Provenance
from .projection import project_lp, quantize_into_ball

logger = logging.getLogger(__name__)


class UapConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    xi: float = Field(default=0.1, gt=0.0)
    p: Union[Literal[2], Literal["inf"]] = 2
    delta: float = Field(default=0.2, ge=0.0, le=1.0)
    i_max: int = Field(default=5, ge=0)
    restricted: Tuple[int, ...] = ()
    seed: int = 0
    # candidate fooling rates estimated on a random sample instead of the whole set
    fr_sample_size: Optional[int] = Field(default=None, ge=1)
    max_deepfool_iter: int = Field(default=MAX_ITER, ge=1)
    overshoot: float = Field(default=OVERSHOOT, ge=0.0)


# ============================================================================
# TRACE
# ============================================================================

@dataclass(frozen=True)
class TraceEntry:
    pass_index: int
    step: int                    # position inside the pass
    input_index: int
    triggering_class: int        # f(x_i + v) right after the update
    fooling_rate: float          # F1 on the training set
    norm_l2: float
    class_fractions: np.ndarray  # fraction of training inputs predicted as each class under v
    self_confidences: np.ndarray  # softmax of v classified as an input


@dataclass
class AttackTrace:
    entries: List[TraceEntry] = field(default_factory=list)
    dominant_class: Optional[int] = None
    passes_completed: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def fooling_rates(self) -> np.ndarray:
        return np.array([e.fooling_rate for e in self.entries])

    def series(self, y_b: Optional[int] = None, first_pass_only: bool = False) -> Dict[str, np.ndarray]:
        """F1, F2, F3 and l2 norm per accepted update, F2/F3 measured for class y_b."""
        y_b = self.dominant_class if y_b is None else y_b
        entries = [e for e in self.entries if not first_pass_only or e.pass_index == 0]
        return {
            "F1": np.array([e.fooling_rate for e in entries]),
            "F2": np.array([e.class_fractions[y_b] for e in entries]) if y_b is not None else np.array([]),
            "F3": np.array([e.self_confidences[y_b] for e in entries]) if y_b is not None else np.array([]),
            "norm_l2": np.array([e.norm_l2 for e in entries]),
        }

    def rows(self) -> List[Dict]:
        y_b = self.dominant_class
        return [
            {
                "pass": e.pass_index,
                "step": e.step,
                "input_index": e.input_index,
                "triggering_class": e.triggering_class,
                "F1": e.fooling_rate,
                "F2": float(e.class_fractions[y_b]) if y_b is not None else None,
                "F3": float(e.self_confidences[y_b]) if y_b is not None else None,
                "norm_l2": e.norm_l2,
            }
            for e in self.entries
        ]


@dataclass(frozen=True)
class UapResult:
    perturbation: Perturbation
    trace: AttackTrace
    fooling_rate: float   # training-set F1 of the stored (float32) perturbation


# ============================================================================
# ATTACK
# ============================================================================

def _check_restricted(ucfg: UapConfig, k: int) -> None:
    bad = [r for r in ucfg.restricted if not 0 <= r < k]
    if bad:
        raise InvalidConfig(f"restricted classes {bad} are outside [0, {k})")
    if len(set(ucfg.restricted)) >= k - 1:
        raise InvalidConfig("restricted set must leave at least two classes unrestricted")


def uap_hc(train_inputs: Union[LabeledDataset, np.ndarray], c: BaseClassifier, ucfg: UapConfig) -> UapResult:
    """
    Universal perturbation for `train_inputs`.

    Returns:
        UapResult with a float32-representable perturbation inside the ball
        and the trace of accepted updates
    """
    X = np.asarray(getattr(train_inputs, "waveforms", train_inputs), dtype=np.float64)
    n = X.shape[0]
    if n == 0:
        raise InvalidConfig("uap_hc needs at least one training input")
    _check_restricted(ucfg, c.class_count)
    restricted = set(ucfg.restricted)

    clean = c.predict_batch(X)
    v = np.zeros(X.shape[1])
    perturbed = clean.copy()
    fooling_rate = 0.0
    trace = AttackTrace()
    order_stream = rng([ucfg.seed, 0])
    sample_stream = rng([ucfg.seed, 1])

    logger.info(f"🎯 UAP-HC: n={n}, xi={ucfg.xi}, p={ucfg.p}, delta={ucfg.delta}, "
                f"i_max={ucfg.i_max}, restricted={sorted(restricted)}, seed={ucfg.seed}")

    for pass_index in range(ucfg.i_max):
        if fooling_rate >= 1.0 - ucfg.delta:
            break
        accepted = 0
        for step, idx in enumerate(order_stream.permutation(n)):
            if perturbed[idx] != clean[idx]:
                continue
            result = deepfool(X[idx] + v, c, restricted=restricted,
                              max_iter=ucfg.max_deepfool_iter, overshoot=ucfg.overshoot)
            candidate = project_lp(v + result.perturbation.values, ucfg.p, ucfg.xi)

            triggering = c.predict(X[idx] + candidate)
            if triggering in restricted:
                continue

            if ucfg.fr_sample_size and ucfg.fr_sample_size < n:
                sample = sample_stream.choice(n, size=ucfg.fr_sample_size, replace=False)
                cand_sample = c.predict_batch(X[sample] + candidate)
                if np.mean(cand_sample != clean[sample]) <= np.mean(perturbed[sample] != clean[sample]):
                    continue
                cand_preds = c.predict_batch(X + candidate)
            else:
                cand_preds = c.predict_batch(X + candidate)
            cand_rate = float(np.mean(cand_preds != clean))
            if not cand_rate > fooling_rate:
                continue

            v, perturbed, fooling_rate = candidate, cand_preds, cand_rate
            accepted += 1
            trace.entries.append(TraceEntry(
                pass_index=pass_index,
                step=step,
                input_index=int(idx),
                triggering_class=int(triggering),
                fooling_rate=fooling_rate,
                norm_l2=float(np.linalg.norm(v)),
                class_fractions=np.bincount(perturbed, minlength=c.class_count) / n,
                self_confidences=c.confidences(v),
            ))
            logger.debug(f"accepted update: pass={pass_index}, step={step}, FR={fooling_rate:.4f}")
            if fooling_rate >= 1.0 - ucfg.delta:
                break
        trace.passes_completed = pass_index + 1
        logger.info(f"🔁 Pass {pass_index + 1}/{ucfg.i_max}: accepted={accepted}, FR={fooling_rate:.4f}")

    stored = quantize_into_ball(v, ucfg.p, ucfg.xi)
    final_preds = c.predict_batch(X + stored)
    trace.dominant_class = dominant_class(clean, final_preds, c.class_count, fallback=c.predict(stored))
    final_rate = float(np.mean(final_preds != clean))

    perturbation = Perturbation(
        stored, Representation.WAVEFORM, Provenance.UAP_HC,
        {"xi": ucfg.xi, "p": ucfg.p, "delta": ucfg.delta, "i_max": ucfg.i_max,
         "restricted": sorted(restricted), "seed": ucfg.seed,
         "passes": trace.passes_completed, "accepted_updates": len(trace),
         "train_fooling_rate": final_rate, "dominant_class": trace.dominant_class},
    )
    logger.info(f"✅ UAP-HC done: FR={final_rate:.4f}, ||v||2={perturbation.norm_l2:.4f}, "
                f"updates={len(trace)}, dominant={trace.dominant_class}")
    return UapResult(perturbation=perturbation, trace=trace, fooling_rate=final_rate)
