"""
Synthetic command-like dataset.

Each class is a fixed spectral signature (harmonic stack, linear chirp,
band-limited noise or near-silence). Items of one class differ only by
seeded additive noise scaled by noise_level and the class amplitude, so
noise_level = 0 yields identical waveforms within a class.
"""

import logging
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from services.core.errors import InvalidConfig
from services.numeric.sampling import quantize_f32, rng
from services.signal.config import PipelineConfig
from .labeled import DESK_CLASS_NAMES, LabeledDataset

logger = logging.getLogger(__name__)


class ClassRecipe(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["silence", "noise_band", "harmonic", "chirp"]
    amplitude: float = Field(gt=0.0, le=1.0)
    f0_hz: float = 0.0
    n_harmonics: int = 0
    f_start_hz: float = 0.0
    f_end_hz: float = 0.0
    band_lo_hz: float = 0.0
    band_hi_hz: float = 0.0


DEFAULT_RECIPES: Dict[str, ClassRecipe] = {
    "silence": ClassRecipe(kind="silence", amplitude=0.01),
    "unknown": ClassRecipe(kind="noise_band", amplitude=0.3, band_lo_hz=1500.0, band_hi_hz=3000.0),
    "yes": ClassRecipe(kind="harmonic", amplitude=0.5, f0_hz=180.0, n_harmonics=5),
    "no": ClassRecipe(kind="harmonic", amplitude=0.5, f0_hz=320.0, n_harmonics=4),
    "up": ClassRecipe(kind="harmonic", amplitude=0.5, f0_hz=450.0, n_harmonics=3),
    "down": ClassRecipe(kind="chirp", amplitude=0.4, f_start_hz=2500.0, f_end_hz=400.0),
    "left": ClassRecipe(kind="chirp", amplitude=0.4, f_start_hz=300.0, f_end_hz=2400.0),
    "right": ClassRecipe(kind="harmonic", amplitude=0.5, f0_hz=700.0, n_harmonics=3),
    "on": ClassRecipe(kind="harmonic", amplitude=0.4, f0_hz=250.0, n_harmonics=2),
    "off": ClassRecipe(kind="noise_band", amplitude=0.3, band_lo_hz=200.0, band_hi_hz=800.0),
    "stop": ClassRecipe(kind="chirp", amplitude=0.4, f_start_hz=800.0, f_end_hz=3200.0),
    "go": ClassRecipe(kind="harmonic", amplitude=0.5, f0_hz=1000.0, n_harmonics=2),
}


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    class_names: List[str] = Field(default_factory=lambda: list(DESK_CLASS_NAMES))
    per_class: int = Field(default=100, ge=1)
    seed: int = 0
    noise_level: float = Field(default=0.1, ge=0.0, lt=1.0)
    class_recipes: Optional[Dict[str, ClassRecipe]] = None

    @property
    def k(self) -> int:
        return len(self.class_names)

    @model_validator(mode="after")
    def _check_recipes(self):
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class_names must be unique")
        recipes = self.recipes()
        for i in range(len(recipes)):
            for j in range(i + 1, len(recipes)):
                if recipes[i] == recipes[j]:
                    raise ValueError(
                        f"classes '{self.class_names[i]}' and '{self.class_names[j]}' share a recipe"
                    )
        return self

    def recipes(self) -> List[ClassRecipe]:
        table = {**DEFAULT_RECIPES, **(self.class_recipes or {})}
        missing = [name for name in self.class_names if name not in table]
        if missing:
            raise ValueError(f"no synthesis recipe for classes {missing}")
        return [table[name] for name in self.class_names]


# ============================================================================
# SIGNATURES
# ============================================================================

def _peak_normalize(signal: np.ndarray, amplitude: float) -> np.ndarray:
    peak = np.max(np.abs(signal))
    return signal * (amplitude / peak) if peak > 0 else signal


def _band_noise(stream: np.random.Generator, n: int, sample_rate: int,
                lo_hz: float, hi_hz: float) -> np.ndarray:
    spectrum = np.fft.rfft(stream.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate)
    spectrum[(freqs < lo_hz) | (freqs > hi_hz)] = 0.0
    return np.fft.irfft(spectrum, n=n)


def class_signature(recipe: ClassRecipe, cfg: PipelineConfig, stream: np.random.Generator) -> np.ndarray:
    """Noise-free waveform of one class (fixed patterns are drawn from `stream`)."""
    n, sr = cfg.input_len, cfg.sample_rate_hz
    t = np.arange(n) / sr
    nyquist = sr / 2.0

    if recipe.kind == "silence":
        signal = stream.uniform(-1.0, 1.0, n)
    elif recipe.kind == "noise_band":
        signal = _band_noise(stream, n, sr, recipe.band_lo_hz, min(recipe.band_hi_hz, nyquist))
    elif recipe.kind == "harmonic":
        signal = np.zeros(n)
        for h in range(1, max(1, recipe.n_harmonics) + 1):
            if h * recipe.f0_hz >= nyquist:
                break
            signal += np.sin(2.0 * np.pi * h * recipe.f0_hz * t) / h
    else:
        duration = n / sr
        f0 = min(recipe.f_start_hz, nyquist)
        f1 = min(recipe.f_end_hz, nyquist)
        phase = 2.0 * np.pi * (f0 * t + (f1 - f0) * t ** 2 / (2.0 * duration))
        signal = np.sin(phase)
    return _peak_normalize(signal, recipe.amplitude)


def generate_synthetic(spec: SynthSpec, cfg: PipelineConfig, split_tag: str = "train") -> LabeledDataset:
    """
    Deterministic synthetic dataset: spec.per_class items for each class.

    Items are grouped by class in class order; waveforms are clipped to
    [-1, 1] and kept float32-representable.
    """
    try:
        recipes = spec.recipes()
    except ValueError as e:
        raise InvalidConfig(str(e))

    logger.info(f"🎛️ Generating synthetic set: k={spec.k}, per_class={spec.per_class}, seed={spec.seed}")
    waveforms, labels = [], []
    for label, recipe in enumerate(recipes):
        signature = class_signature(recipe, cfg, rng([spec.seed, label, 0]))
        noise_stream = rng([spec.seed, label, 1])
        for _ in range(spec.per_class):
            noise = noise_stream.uniform(-1.0, 1.0, cfg.input_len) * spec.noise_level * recipe.amplitude
            waveforms.append(np.clip(signature + noise, -1.0, 1.0))
            labels.append(label)

    return LabeledDataset(
        waveforms=quantize_f32(np.stack(waveforms)),
        labels=np.asarray(labels),
        class_names=tuple(spec.class_names),
        split_tag=split_tag,
        sample_rate_hz=cfg.sample_rate_hz,
    )
