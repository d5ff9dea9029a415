"""
Signal pipeline: waveform -> spectrogram -> MFCC (the transform g)

Modules:
- config: PipelineConfig and the paper / desk presets
- pipeline: framing, spectrogram, mel filterbank, MFCC, transform and its VJP
"""

from .config import PipelineConfig, Representation, PRESETS, get_preset
from .pipeline import (
    Waveform,
    Spectrogram,
    MfccFeatures,
    frame,
    spectrogram,
    mel_filterbank,
    mel_center_frequencies,
    dct_matrix,
    mfcc,
    transform,
    transform_tensor,
    transform_vjp,
)

__all__ = [
    'PipelineConfig',
    'Representation',
    'PRESETS',
    'get_preset',
    'Waveform',
    'Spectrogram',
    'MfccFeatures',
    'frame',
    'spectrogram',
    'mel_filterbank',
    'mel_center_frequencies',
    'dct_matrix',
    'mfcc',
    'transform',
    'transform_tensor',
    'transform_vjp',
]
