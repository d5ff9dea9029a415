"""
Random-volume probe: classify uniform [-1, 1] waveforms and count the
predicted classes.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from services.model.classifier import BaseClassifier
from services.numeric.sampling import rng

logger = logging.getLogger(__name__)

BATCH = 4096


@dataclass(frozen=True)
class VolumeProbeResult:
    counts: np.ndarray
    n_samples: int
    seed: int

    @property
    def modal_class(self) -> int:
        return int(np.argmax(self.counts))

    @property
    def modal_share(self) -> float:
        return float(self.counts[self.modal_class] / self.n_samples)

    def to_dict(self, class_names: Sequence[str]) -> Dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "counts": {name: int(n) for name, n in zip(class_names, self.counts)},
            "modal_class": class_names[self.modal_class],
            "modal_share": self.modal_share,
        }


def volume_probe(c: BaseClassifier, n_samples: int, seed: int, batch_size: int = BATCH) -> VolumeProbeResult:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    stream = rng(seed)
    counts = np.zeros(c.class_count, dtype=np.int64)
    remaining = n_samples
    while remaining > 0:
        size = min(batch_size, remaining)
        counts += np.bincount(c.predict_batch(stream.uniform(-1.0, 1.0, (size, c.input_len))),
                              minlength=c.class_count)
        remaining -= size
    result = VolumeProbeResult(counts=counts, n_samples=n_samples, seed=seed)
    logger.info(f"🎲 Volume probe: {n_samples} samples, modal class {result.modal_class} "
                f"({100.0 * result.modal_share:.1f}%)")
    return result
