# storage/artifact_storage.py
"""
File-backed artifact storage.

Every artifact is a JSON metadata file plus an adjacent raw little-endian
float32 payload:

    <stem>.json   metadata (shape, dtype, digest, ...)
    <stem>.f32    payload
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from services.attacks.perturbation import Perturbation
from services.core.errors import ArtifactMissing, ShapeMismatch
from services.dataset.labeled import LabeledDataset

logger = logging.getLogger(__name__)

PAYLOAD_DTYPE = "<f4"


def _paths(stem) -> Tuple[Path, Path]:
    stem = Path(stem)
    return stem.with_suffix(".json"), stem.with_suffix(".f32")


def set_array(stem, values: np.ndarray, meta: Dict) -> str:
    """Write payload and metadata; returns the payload sha256."""
    meta_path, payload_path = _paths(stem)
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(values, dtype=PAYLOAD_DTYPE).tobytes()
    digest = hashlib.sha256(payload).hexdigest()
    payload_path.write_bytes(payload)
    record = {**meta, "shape": list(np.shape(values)), "dtype": "float32-le", "sha256": digest}
    meta_path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return digest


def get_array(stem) -> Tuple[np.ndarray, Dict]:
    meta_path, payload_path = _paths(stem)
    if not meta_path.exists() or not payload_path.exists():
        raise ArtifactMissing(f"artifact {Path(stem)} not found", path=str(stem))
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    values = np.frombuffer(payload_path.read_bytes(), dtype=PAYLOAD_DTYPE).astype(np.float64)
    shape = tuple(meta["shape"])
    if values.size != int(np.prod(shape)):
        raise ShapeMismatch(f"payload of {stem} holds {values.size} values, metadata says {shape}")
    return values.reshape(shape), meta


# ============================================================================
# PERTURBATIONS
# ============================================================================

def save_perturbation(v: Perturbation, stem) -> str:
    meta = {
        "kind": "perturbation",
        "domain": v.domain.value,
        "provenance": v.provenance.value,
        "norm_l2": v.norm_l2,
        "norm_inf": v.norm_inf,
        "meta": v.meta,
    }
    digest = set_array(stem, v.values, meta)
    logger.info(f"💾 Saved perturbation {stem} (||v||2={v.norm_l2:.4f}, sha256={digest[:12]})")
    return digest


def load_perturbation(stem) -> Perturbation:
    values, meta = get_array(stem)
    return Perturbation(values, meta["domain"], meta["provenance"], meta.get("meta", {}))


# ============================================================================
# DATASETS
# ============================================================================

def save_dataset(ds: LabeledDataset, stem) -> str:
    return set_array(stem, ds.waveforms, {"kind": "dataset", **ds.manifest()})


def load_dataset(stem) -> LabeledDataset:
    waveforms, meta = get_array(stem)
    return LabeledDataset(
        waveforms=waveforms,
        labels=np.asarray(meta["labels"], dtype=np.int64),
        class_names=tuple(meta["class_names"]),
        split_tag=meta["split_tag"],
        sample_rate_hz=meta["sample_rate_hz"],
    )
