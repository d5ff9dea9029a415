"""
Differentiable feature pipeline.

g_SPEC(w): periodic-Hann (or rectangular) framing, real FFT at fft_size
points, smoothed magnitude of the first retained_bins components.
g_MFCC(w): mel filterbank energies of g_SPEC(w), natural log with
log_floor, orthonormal type-II DCT, first n_mfcc coefficients.

Every stage is written with torch so attacks can backpropagate from
class scores down to raw samples. All computations run in float64.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
import torch
from scipy.fft import dct

from services.core.errors import InvalidConfig, LengthMismatch, ShapeMismatch
from services.core.runtime import DTYPE
from .config import PipelineConfig, Representation

logger = logging.getLogger(__name__)

# |z| is smoothed as sqrt(|z|^2 + eps) - sqrt(eps): finite gradients, exact zero at silence
MAGNITUDE_EPS = 1e-12
_SQRT_EPS = MAGNITUDE_EPS ** 0.5


# ============================================================================
# DOMAIN TYPES
# ============================================================================

@dataclass(frozen=True)
class Waveform:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ShapeMismatch(f"waveform must be 1-D, got shape {samples.shape}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def out_of_range_count(self) -> int:
        """Samples outside [-1, 1]; perturbed signals are reported, never silently clipped."""
        return int(np.sum(np.abs(self.samples) > 1.0))


@dataclass(frozen=True)
class Spectrogram:
    values: np.ndarray  # n_frames x retained_bins, non-negative


@dataclass(frozen=True)
class MfccFeatures:
    values: np.ndarray  # n_frames x n_mfcc


WaveformLike = Union[Waveform, np.ndarray]


def _samples(w: WaveformLike, cfg: PipelineConfig) -> np.ndarray:
    samples = w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=np.float64)
    if samples.ndim != 1 or samples.size != cfg.input_len:
        raise LengthMismatch(
            f"waveform has {samples.size} samples, expected {cfg.input_len}",
            got=int(samples.size), expected=cfg.input_len,
        )
    return samples


# ============================================================================
# CONSTANT OPERATORS (cached per config)
# ============================================================================

@lru_cache(maxsize=16)
def _window(cfg: PipelineConfig) -> torch.Tensor:
    if cfg.window == "rectangular":
        return torch.ones(cfg.frame_len, dtype=DTYPE)
    return torch.hann_window(cfg.frame_len, periodic=True, dtype=DTYPE)


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz, dtype=np.float64) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def _mel_edges(cfg: PipelineConfig) -> np.ndarray:
    nyquist = cfg.sample_rate_hz / 2.0
    mel_points = np.linspace(_hz_to_mel(cfg.mel_low_hz), _hz_to_mel(nyquist), cfg.n_mels + 2)
    return _mel_to_hz(mel_points)


def mel_center_frequencies(cfg: PipelineConfig) -> np.ndarray:
    """Peak frequency (Hz) of every triangular filter."""
    return _mel_edges(cfg)[1:-1]


@lru_cache(maxsize=16)
def _mel_filterbank_cached(cfg: PipelineConfig) -> np.ndarray:
    if cfg.n_mels < 2:
        raise InvalidConfig(f"n_mels must be >= 2, got {cfg.n_mels}")
    if cfg.n_mels > cfg.retained_bins:
        raise InvalidConfig(
            f"n_mels ({cfg.n_mels}) exceeds retained_bins ({cfg.retained_bins})"
        )
    edges = _mel_edges(cfg)
    bin_hz = np.arange(cfg.retained_bins) * cfg.sample_rate_hz / cfg.fft_size
    bank = np.zeros((cfg.n_mels, cfg.retained_bins))
    for m in range(cfg.n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_hz - left) / (center - left)
        falling = (right - bin_hz) / (right - center)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
        if not np.any(bank[m] > 0):
            # filter narrower than one bin: put its mass on the nearest bin
            bank[m, int(np.argmin(np.abs(bin_hz - center)))] = 1.0
    bank.setflags(write=False)
    return bank


def mel_filterbank(cfg: PipelineConfig) -> np.ndarray:
    """
    Triangular mel filters spanning mel_low_hz to Nyquist.

    Returns:
        n_mels x retained_bins non-negative matrix

    Raises:
        InvalidConfig: n_mels > retained_bins
    """
    return _mel_filterbank_cached(cfg).copy()


@lru_cache(maxsize=16)
def _dct_cached(n: int) -> np.ndarray:
    matrix = dct(np.eye(n), type=2, norm="ortho", axis=0)
    matrix.setflags(write=False)
    return matrix


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix D with dct(x) = D @ x."""
    return _dct_cached(n).copy()


@lru_cache(maxsize=16)
def _operators(cfg: PipelineConfig):
    fb = torch.from_numpy(mel_filterbank(cfg)).to(DTYPE)
    cepstral = torch.from_numpy(dct_matrix(cfg.n_mels)[: cfg.n_mfcc].T.copy()).to(DTYPE)
    return fb, cepstral


# ============================================================================
# TENSOR PIPELINE (batched, differentiable)
# ============================================================================

def frame_tensor(x: torch.Tensor, cfg: PipelineConfig) -> torch.Tensor:
    """[..., input_len] -> [..., n_frames, frame_len], windowed."""
    return x.unfold(-1, cfg.frame_len, cfg.hop) * _window(cfg)


def spectrogram_tensor(x: torch.Tensor, cfg: PipelineConfig) -> torch.Tensor:
    """[..., input_len] -> [..., n_frames, retained_bins] smoothed magnitudes."""
    spectrum = torch.fft.rfft(frame_tensor(x, cfg), n=cfg.fft_size, dim=-1)
    power = spectrum.real ** 2 + spectrum.imag ** 2
    return torch.sqrt(power + MAGNITUDE_EPS) - _SQRT_EPS


def mfcc_from_spectrogram_tensor(spec: torch.Tensor, cfg: PipelineConfig) -> torch.Tensor:
    """[..., n_frames, retained_bins] -> [..., n_frames, n_mfcc]."""
    fb, cepstral = _operators(cfg)
    mel_energy = spec @ fb.T
    return torch.log(mel_energy + cfg.log_floor) @ cepstral


def transform_tensor(x: torch.Tensor, representation, cfg: PipelineConfig) -> torch.Tensor:
    """g applied to a batch of waveforms (any leading shape)."""
    representation = Representation(representation)
    if x.shape[-1] != cfg.input_len:
        raise LengthMismatch(f"waveform has {x.shape[-1]} samples, expected {cfg.input_len}")
    if representation is Representation.WAVEFORM:
        return x
    spec = spectrogram_tensor(x, cfg)
    if representation is Representation.SPEC:
        return spec
    return mfcc_from_spectrogram_tensor(spec, cfg)


# ============================================================================
# NUMPY OPERATIONS
# ============================================================================

def frame(w: WaveformLike, cfg: PipelineConfig) -> np.ndarray:
    """
    Split a waveform into overlapping windowed frames.

    Returns:
        n_frames x frame_len matrix; row i is samples[i*hop : i*hop + frame_len] * window

    Raises:
        LengthMismatch: if |w| != cfg.input_len
    """
    x = torch.from_numpy(_samples(w, cfg))
    return frame_tensor(x, cfg).numpy()


def spectrogram(w: WaveformLike, cfg: PipelineConfig) -> Spectrogram:
    x = torch.from_numpy(_samples(w, cfg))
    return Spectrogram(spectrogram_tensor(x, cfg).numpy())


def mfcc(s: Spectrogram, cfg: PipelineConfig) -> MfccFeatures:
    values = np.asarray(s.values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != cfg.retained_bins:
        raise ShapeMismatch(
            f"spectrogram shape {values.shape} does not have {cfg.retained_bins} bins"
        )
    return MfccFeatures(mfcc_from_spectrogram_tensor(torch.from_numpy(values), cfg).numpy())


def transform(w: WaveformLike, representation, cfg: PipelineConfig) -> np.ndarray:
    """g_SPEC(w) or g_MFCC(w) as a numpy array."""
    x = torch.from_numpy(_samples(w, cfg))
    return transform_tensor(x, representation, cfg).numpy().copy()


def transform_vjp(w: WaveformLike, representation, upstream_grad: np.ndarray,
                  cfg: PipelineConfig) -> np.ndarray:
    """
    Vector-Jacobian product of g at w.

    Args:
        upstream_grad: array shaped like transform(w, representation)

    Returns:
        Gradient over the input_len samples
    """
    representation = Representation(representation)
    upstream = np.asarray(upstream_grad, dtype=np.float64)
    expected = cfg.shape_of(representation)
    if upstream.shape != expected:
        raise ShapeMismatch(f"upstream gradient shape {upstream.shape}, expected {expected}")

    x = torch.from_numpy(_samples(w, cfg).copy()).requires_grad_(True)
    y = transform_tensor(x, representation, cfg)
    (grad,) = torch.autograd.grad(y, x, grad_outputs=torch.from_numpy(upstream))
    return grad.numpy()
