"""
Perturbation: a vector in one representation domain with norm bookkeeping
and provenance.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict

import numpy as np

from services.core.errors import ShapeMismatch
from services.numeric.sampling import quantize_f32
from services.signal.config import PipelineConfig, Representation


class Provenance(str, Enum):
    DEEPFOOL = "deepfool"
    UAP_HC = "uap_hc"
    TARGET_CONF = "target_conf"
    RANDOM = "random"
    SINGULAR_VECTOR = "singular_vector"


@dataclass(frozen=True)
class Perturbation:
    values: np.ndarray
    domain: Representation
    provenance: Provenance
    meta: Dict[str, Any] = field(default_factory=dict)
    norm_l2: float = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", Representation(self.domain))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        object.__setattr__(self, "norm_l2", float(np.linalg.norm(values)))

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def norm(self, p) -> float:
        return self.norm_inf if np.isinf(norm_order(p)) else self.norm_l2

    def check_shape(self, cfg: PipelineConfig) -> "Perturbation":
        expected = cfg.shape_of(self.domain)
        if self.values.shape != expected:
            raise ShapeMismatch(f"{self.domain.value} perturbation has shape {self.values.shape}, expected {expected}")
        return self

    def with_values(self, values: np.ndarray, **meta) -> "Perturbation":
        return Perturbation(values, self.domain, self.provenance, {**self.meta, **meta})

    def scaled(self, factor: float) -> "Perturbation":
        return self.with_values(self.values * factor)

    def quantized(self) -> "Perturbation":
        return self.with_values(quantize_f32(self.values))

    @classmethod
    def zeros(cls, cfg: PipelineConfig, provenance=Provenance.UAP_HC,
              domain=Representation.WAVEFORM) -> "Perturbation":
        return cls(np.zeros(cfg.shape_of(domain)), domain, provenance)


def norm_order(p) -> float:
    """Map a norm spec (2, '2', 'inf', inf) to 2.0 or inf."""
    if isinstance(p, str):
        p = p.strip().lower()
        if p in ("inf", "infinity", "linf"):
            return np.inf
        p = float(p)
    p = float(p)
    if p == 2.0 or np.isinf(p):
        return p
    raise ValueError(f"unsupported norm order {p}; expected 2 or inf")
