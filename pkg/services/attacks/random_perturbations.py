"""
Random waveform perturbations and feature-space perturbations induced by
a waveform perturbation at an anchor input.
"""

import numpy as np
import torch

from services.numeric.sampling import SeedLike, rng
from services.signal.config import PipelineConfig, Representation
from services.signal.pipeline import transform, transform_tensor
from .perturbation import Perturbation, Provenance


def random_waveform_perturbation(seed: SeedLike, target_l2: float, length: int) -> Perturbation:
    """Uniform [-1, 1] coordinates rescaled to an exact l2 norm."""
    if target_l2 <= 0:
        raise ValueError(f"target_l2 must be positive, got {target_l2}")
    values = rng(seed).uniform(-1.0, 1.0, length)
    values = values * (target_l2 / np.linalg.norm(values))
    return Perturbation(values, Representation.WAVEFORM, Provenance.RANDOM, {"target_l2": target_l2})


def feature_perturbation(x, v: Perturbation, representation, cfg: PipelineConfig) -> Perturbation:
    """g(x + v) - g(x): depends on the anchor x because g is nonlinear."""
    representation = Representation(representation)
    samples = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    values = transform(samples + v.values, representation, cfg) - transform(samples, representation, cfg)
    return Perturbation(values, representation, v.provenance, {**v.meta, "induced_from": "WAVEFORM"})


def induced_feature_norms(waveforms: np.ndarray, v: Perturbation, representation,
                          cfg: PipelineConfig) -> np.ndarray:
    """||g(x + v) - g(x)||_2 for every row x of `waveforms`."""
    x = torch.from_numpy(np.ascontiguousarray(waveforms, dtype=np.float64))
    shift = torch.from_numpy(np.ascontiguousarray(v.values))
    with torch.no_grad():
        diff = transform_tensor(x + shift, representation, cfg) - transform_tensor(x, representation, cfg)
    return torch.linalg.vector_norm(diff.flatten(start_dim=1), dim=1).numpy()
