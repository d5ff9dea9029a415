"""
Checkpoint file

    magic      8 bytes  b"UAPLABCK"
    version    u32 LE
    header_len u32 LE
    header     UTF-8 JSON (arch, pipeline, class_count, seed, class_names, tensors)
    payload    little-endian float32 blocks in header["tensors"] order

Parameters are float32-representable, so save -> load is bit-exact.
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import torch

from services.core.errors import CheckpointFormatError
from services.core.runtime import DTYPE
from services.signal.config import PipelineConfig
from .architecture import ArchConfig
from .classifier import SpeechCommandNet

logger = logging.getLogger(__name__)

MAGIC = b"UAPLABCK"
VERSION = 1


def save_checkpoint(model: SpeechCommandNet, path, class_names: Optional[Sequence[str]] = None) -> str:
    """
    Write the classifier to `path`.

    Returns:
        sha256 hex digest of the written file
    """
    state = model.state_dict()
    header = {
        "arch": model.arch.model_dump(mode="json"),
        "pipeline": model.pipeline.model_dump(mode="json"),
        "class_count": model.class_count,
        "seed": model.seed,
        "class_names": list(class_names) if class_names is not None else None,
        "tensors": [[name, list(tensor.shape)] for name, tensor in state.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(
        tensor.detach().numpy().astype("<f4").tobytes() for tensor in state.values()
    )
    blob = MAGIC + struct.pack("<II", VERSION, len(header_bytes)) + header_bytes + payload

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    digest = hashlib.sha256(blob).hexdigest()
    logger.info(f"💾 Saved checkpoint {path} ({len(blob)} bytes, sha256={digest[:12]})")
    return digest


def load_checkpoint(path) -> Tuple[SpeechCommandNet, Dict]:
    """
    Read a classifier written by save_checkpoint.

    Returns:
        (classifier, header dict)

    Raises:
        CheckpointFormatError: bad magic, unknown version or truncated payload
    """
    blob = Path(path).read_bytes()
    if blob[:8] != MAGIC:
        raise CheckpointFormatError(f"{path} is not a checkpoint (bad magic)")
    if len(blob) < 16:
        raise CheckpointFormatError(f"{path} is truncated")
    version, header_len = struct.unpack("<II", blob[8:16])
    if version != VERSION:
        raise CheckpointFormatError(f"unsupported checkpoint version {version}", version=version)
    try:
        header = json.loads(blob[16:16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"unreadable checkpoint header: {e}")

    model = SpeechCommandNet(
        ArchConfig.model_validate(header["arch"]),
        PipelineConfig.model_validate(header["pipeline"]),
        header["class_count"],
        header["seed"],
    )

    offset = 16 + header_len
    state = {}
    for name, shape in header["tensors"]:
        count = int(np.prod(shape)) if shape else 1
        end = offset + 4 * count
        if end > len(blob):
            raise CheckpointFormatError(f"payload truncated at tensor '{name}'")
        values = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).astype(np.float64)
        state[name] = torch.from_numpy(values.reshape(shape)).to(DTYPE)
        offset = end
    if offset != len(blob):
        raise CheckpointFormatError(f"{len(blob) - offset} trailing bytes after payload")

    model.load_state_dict(state)
    model.eval()
    logger.info(f"📂 Loaded checkpoint {path}: k={model.class_count}")
    return model, header
