"""
Labeled waveform datasets

- labeled: LabeledDataset container and per-class subsetting
- synthetic: deterministic command-like generator (desk experiments)
- wav_loader: RIFF PCM ingestion for real recordings
- splits: stratified train/test split
"""

from .labeled import LabeledDataset, PAPER_CLASS_NAMES, DESK_CLASS_NAMES
from .synthetic import ClassRecipe, SynthSpec, DEFAULT_RECIPES, generate_synthetic
from .wav_loader import load_wav_dir
from .splits import split

__all__ = [
    'LabeledDataset',
    'PAPER_CLASS_NAMES',
    'DESK_CLASS_NAMES',
    'ClassRecipe',
    'SynthSpec',
    'DEFAULT_RECIPES',
    'generate_synthetic',
    'load_wav_dir',
    'split',
]
