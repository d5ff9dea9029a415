"""
WAV Loader

Reads a directory tree path/<class_name>/*.wav of RIFF PCM, 16-bit, mono
clips. Clips are normalized by 1/32768, shorter clips are zero-padded
to input_len and longer clips are rejected (no resampling, no trimming).
"""

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.io import wavfile

from services.core.errors import ClipTooLong, UnknownClassFolder, UnsupportedFormat
from services.signal.config import PipelineConfig
from .labeled import LabeledDataset

logger = logging.getLogger(__name__)

PCM16_SCALE = 32768.0


def read_clip(path: Path, cfg: PipelineConfig) -> np.ndarray:
    """Decode one clip into input_len normalized samples."""
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as e:
        raise UnsupportedFormat(f"{path}: {e}", path=str(path))

    if data.dtype != np.int16:
        raise UnsupportedFormat(f"{path}: expected 16-bit PCM, got {data.dtype}", path=str(path))
    if data.ndim != 1:
        raise UnsupportedFormat(f"{path}: expected mono, got {data.shape[1]} channels", path=str(path))
    if rate != cfg.sample_rate_hz:
        raise UnsupportedFormat(
            f"{path}: sample rate {rate} Hz, expected {cfg.sample_rate_hz} Hz", path=str(path)
        )
    if data.size > cfg.input_len:
        raise ClipTooLong(f"{path}: {data.size} samples exceed input_len {cfg.input_len}", path=str(path))

    samples = np.zeros(cfg.input_len)
    samples[: data.size] = data.astype(np.float64) / PCM16_SCALE
    return samples


def load_wav_dir(path, class_names: Sequence[str], cfg: PipelineConfig,
                 split_tag: str = "train") -> LabeledDataset:
    """
    Load every clip under path/<class_name>/.

    Raises:
        UnknownClassFolder: a sub-directory is not a declared class
        UnsupportedFormat: stereo, non-PCM16 or sample-rate mismatch
        ClipTooLong: clip longer than input_len
    """
    root = Path(path)
    class_names = tuple(class_names)
    folders = sorted(p.name for p in root.iterdir() if p.is_dir())
    unknown = [name for name in folders if name not in class_names]
    if unknown:
        raise UnknownClassFolder(
            f"folders not in the class list: {', '.join(unknown)}", folders=unknown
        )

    waveforms, labels = [], []
    for label, name in enumerate(class_names):
        folder = root / name
        if not folder.is_dir():
            logger.warning(f"⚠️ No folder for class '{name}' under {root}")
            continue
        for clip in sorted(folder.glob("*.wav")):
            waveforms.append(read_clip(clip, cfg))
            labels.append(label)

    logger.info(f"📂 Loaded {len(labels)} clips from {root}")
    stacked = np.stack(waveforms) if waveforms else np.zeros((0, cfg.input_len))
    return LabeledDataset(
        waveforms=stacked,
        labels=np.asarray(labels, dtype=np.int64),
        class_names=class_names,
        split_tag=split_tag,
        sample_rate_hz=cfg.sample_rate_hz,
    )
