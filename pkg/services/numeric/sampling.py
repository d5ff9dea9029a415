"""
Seeded random streams.

All randomness of the lab flows through NumPy PCG64 generators built from
config-declared seeds. Child streams come from SeedSequence.spawn so
parallel trials never share state.
"""

from typing import List, Sequence, Union

import numpy as np

SeedLike = Union[int, Sequence[int]]


def rng(seed: SeedLike) -> np.random.Generator:
    """Deterministic PCG64 stream for a seed (int or int tuple)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def split_streams(seed: SeedLike, n: int) -> List[np.random.Generator]:
    """n independent child streams of one seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def sample_uniform(stream: np.random.Generator, lo: float, hi: float, n) -> np.ndarray:
    if not lo < hi:
        raise ValueError(f"sample_uniform needs lo < hi, got lo={lo}, hi={hi}")
    return stream.uniform(lo, hi, size=n)


def sample_unit_sphere(stream: np.random.Generator, d: int) -> np.ndarray:
    """Uniform direction on the (d-1)-sphere via normalized Gaussian deviates."""
    if d < 1:
        raise ValueError(f"sample_unit_sphere needs d >= 1, got {d}")
    while True:
        g = stream.standard_normal(d)
        norm = np.linalg.norm(g)
        if norm > 0.0:
            return g / norm


def quantize_f32(values: np.ndarray) -> np.ndarray:
    """Round to float32-representable float64 values (exact artifact round trips)."""
    return np.asarray(values, dtype=np.float32).astype(np.float64)
