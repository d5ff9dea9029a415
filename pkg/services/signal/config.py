"""
Pipeline configuration and presets.

paper: 16000-sample inputs, 20 ms frames with 10 ms stride, 512-point FFT
       -> 99 x 257 spectrogram, 99 x 40 MFCC
desk:  2000-sample inputs at 8 kHz, sized so tests run in seconds
"""

from enum import Enum
from typing import Dict, Literal, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from services.core.errors import InvalidConfig


class Representation(str, Enum):
    WAVEFORM = "WAVEFORM"
    SPEC = "SPEC"
    MFCC = "MFCC"


class PipelineConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    input_len: int
    frame_len: int
    hop: int
    fft_size: int
    retained_bins: int
    n_mels: int
    n_mfcc: int
    log_floor: float = 1e-6
    sample_rate_hz: int
    window: Literal["hann", "rectangular"] = "hann"
    mel_low_hz: float = 0.0

    @model_validator(mode="after")
    def _check_invariants(self):
        if min(self.input_len, self.frame_len, self.hop, self.fft_size, self.sample_rate_hz) <= 0:
            raise ValueError("input_len, frame_len, hop, fft_size and sample_rate_hz must be positive")
        if self.frame_len > self.input_len:
            raise ValueError(f"frame_len ({self.frame_len}) exceeds input_len ({self.input_len})")
        if self.frame_len > self.fft_size:
            raise ValueError(f"frame_len ({self.frame_len}) exceeds fft_size ({self.fft_size})")
        if self.retained_bins != self.fft_size // 2 + 1:
            raise ValueError(f"retained_bins must be fft_size/2 + 1 = {self.fft_size // 2 + 1}")
        if self.n_mels < 2 or self.n_mfcc < 1 or self.n_mfcc > self.n_mels:
            raise ValueError(f"need 2 <= n_mels and 1 <= n_mfcc <= n_mels, got {self.n_mels}/{self.n_mfcc}")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        if not 0.0 <= self.mel_low_hz < self.sample_rate_hz / 2:
            raise ValueError("mel_low_hz must lie in [0, Nyquist)")
        return self

    @property
    def n_frames(self) -> int:
        return (self.input_len - self.frame_len) // self.hop + 1

    @property
    def spec_shape(self) -> Tuple[int, int]:
        return (self.n_frames, self.retained_bins)

    @property
    def mfcc_shape(self) -> Tuple[int, int]:
        return (self.n_frames, self.n_mfcc)

    def shape_of(self, representation: "Representation") -> Tuple[int, ...]:
        representation = Representation(representation)
        if representation is Representation.WAVEFORM:
            return (self.input_len,)
        if representation is Representation.SPEC:
            return self.spec_shape
        return self.mfcc_shape


PRESETS: Dict[str, PipelineConfig] = {
    "paper": PipelineConfig(
        input_len=16000, frame_len=320, hop=160, fft_size=512, retained_bins=257,
        n_mels=40, n_mfcc=40, sample_rate_hz=16000,
    ),
    "desk": PipelineConfig(
        input_len=2000, frame_len=64, hop=32, fft_size=128, retained_bins=65,
        n_mels=20, n_mfcc=13, sample_rate_hz=8000,
    ),
}


def get_preset(name: str, **overrides) -> PipelineConfig:
    if name not in PRESETS:
        raise InvalidConfig(f"unknown pipeline preset '{name}', expected one of {sorted(PRESETS)}")
    if not overrides:
        return PRESETS[name]
    return PipelineConfig(**{**PRESETS[name].model_dump(), **overrides})
