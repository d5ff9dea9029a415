"""
Perturbation matrices.

Rows are normalized perturbations, one per anchor input, flattened:

- DEEPFOOL_V: DeepFool perturbation v_i of x_i, in the waveform or as
  g(x_i + v_i) - g(x_i) in SPEC / MFCC space
- RANDOM_R: uniform waveform noise at a fixed l2 norm, same three spaces
- UNIFORM_FEATURE: uniform noise drawn directly in SPEC / MFCC space
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import torch

from services.attacks.deepfool import deepfool
from services.attacks.random_perturbations import random_waveform_perturbation
from services.core.errors import AlreadyFooled, InvalidConfig
from services.dataset.labeled import LabeledDataset
from services.model.classifier import BaseClassifier
from services.numeric.sampling import rng
from services.numeric.svd import normalize_rows
from services.signal.config import PipelineConfig, Representation
from services.signal.pipeline import transform_tensor

logger = logging.getLogger(__name__)

RANDOM_L2 = 0.1


class MatrixKind(str, Enum):
    DEEPFOOL_V = "deepfool"
    RANDOM_R = "random"
    UNIFORM_FEATURE = "uniform"


@dataclass(frozen=True)
class PerturbationMatrix:
    rows: np.ndarray                 # n x D, unit rows
    kind: MatrixKind
    representation: Representation
    anchors: Tuple[int, ...]         # dataset index of every row (empty for UNIFORM_FEATURE)

    @property
    def name(self) -> str:
        return f"{self.kind.value}_{self.representation.value}"


@dataclass(frozen=True)
class DeepFoolBatch:
    anchors: Tuple[int, ...]
    perturbations: np.ndarray        # len(anchors) x input_len, overshoot applied
    skipped: Tuple[int, ...]


def compute_deepfool_perturbations(ds: LabeledDataset, c: BaseClassifier, workers: int = 1) -> DeepFoolBatch:
    """
    DeepFool on every input of ds. Misclassified inputs and unconverged
    runs are skipped and logged; the rest keep dataset order.
    """
    def run(index: int):
        try:
            result = deepfool(ds.waveforms[index], c, label=int(ds.labels[index]))
        except AlreadyFooled:
            return index, None
        return index, result.perturbation.values if result.converged else None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(run, range(len(ds))))

    anchors = tuple(i for i, values in outcomes if values is not None)
    skipped = tuple(i for i, values in outcomes if values is None)
    if skipped:
        logger.warning(f"⚠️ DeepFool skipped {len(skipped)} of {len(ds)} inputs (misclassified or unconverged)")
    perturbations = (np.stack([values for _, values in outcomes if values is not None])
                     if anchors else np.zeros((0, ds.input_len)))
    logger.info(f"🧮 DeepFool perturbations: {len(anchors)} rows, "
                f"median ||v||2={np.median(np.linalg.norm(perturbations, axis=1)) if anchors else 0.0:.4f}")
    return DeepFoolBatch(anchors=anchors, perturbations=perturbations, skipped=skipped)


def _induced_rows(anchors: np.ndarray, perturbations: np.ndarray, representation: Representation,
                  cfg: PipelineConfig) -> np.ndarray:
    x = torch.from_numpy(np.ascontiguousarray(anchors))
    v = torch.from_numpy(np.ascontiguousarray(perturbations))
    with torch.no_grad():
        diff = transform_tensor(x + v, representation, cfg) - transform_tensor(x, representation, cfg)
    return diff.flatten(start_dim=1).numpy()


def _normalized(rows: np.ndarray, anchors: Tuple[int, ...], name: str) -> Tuple[np.ndarray, Tuple[int, ...]]:
    norms = np.linalg.norm(rows, axis=1)
    keep = norms > 0
    if not keep.all():
        logger.warning(f"⚠️ {name}: dropping {int((~keep).sum())} zero rows")
        rows = rows[keep]
        anchors = tuple(a for a, k in zip(anchors, keep) if k) if anchors else anchors
    return normalize_rows(rows), anchors


def build_matrix(ds: LabeledDataset, c: Optional[BaseClassifier], kind, representation,
                 cfg: PipelineConfig, seed: int, deepfool_batch: Optional[DeepFoolBatch] = None,
                 random_l2: float = RANDOM_L2, workers: int = 1) -> PerturbationMatrix:
    """
    Raises:
        InvalidConfig: UNIFORM_FEATURE requested in the waveform domain
    """
    kind = MatrixKind(kind)
    representation = Representation(representation)

    if kind is MatrixKind.UNIFORM_FEATURE:
        if representation is Representation.WAVEFORM:
            raise InvalidConfig("uniform feature matrices exist only for SPEC and MFCC")
        d = int(np.prod(cfg.shape_of(representation)))
        rows = rng([seed, 2]).uniform(-1.0, 1.0, (len(ds), d))
        anchors: Tuple[int, ...] = ()
    else:
        if kind is MatrixKind.DEEPFOOL_V:
            batch = deepfool_batch or compute_deepfool_perturbations(ds, c, workers)
            anchors, waveform_rows = batch.anchors, batch.perturbations
        else:
            anchors = tuple(range(len(ds)))
            waveform_rows = np.stack([
                random_waveform_perturbation((seed, 1, i), random_l2, ds.input_len).values
                for i in anchors
            ])
        if representation is Representation.WAVEFORM:
            rows = waveform_rows
        else:
            rows = _induced_rows(ds.waveforms[list(anchors)], waveform_rows, representation, cfg)

    rows, anchors = _normalized(rows, anchors, f"{kind.value}_{representation.value}")
    matrix = PerturbationMatrix(rows=rows, kind=kind, representation=representation, anchors=anchors)
    logger.info(f"🧱 Built matrix {matrix.name}: {rows.shape[0]} x {rows.shape[1]}")
    return matrix
