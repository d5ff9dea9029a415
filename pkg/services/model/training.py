"""
Minibatch SGD with momentum on mean cross-entropy.

Features are computed once from the training waveforms (the pipeline has
no trainable parameters), the classifier's standardization is fitted on
them and the shuffle order comes from a seeded torch.Generator, so equal
seeds give bit-identical parameter trajectories.
"""

import copy
import logging
from typing import List, Tuple

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field
from torch.nn import functional as F

from services.core.errors import EmptyEvaluationSet, ShapeMismatch
from services.dataset.labeled import LabeledDataset
from .classifier import BaseClassifier

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=0.01, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    seed: int = 0


def _mean_loss(model: BaseClassifier, feats: torch.Tensor, labels: torch.Tensor) -> float:
    with torch.no_grad():
        return float(F.cross_entropy(model.logits_from_features(feats), labels))


def train(c: BaseClassifier, train_set: LabeledDataset, tc: TrainConfig) -> Tuple[BaseClassifier, List[float]]:
    """
    Train a copy of `c`; the input classifier is never mutated.

    Returns:
        (trained classifier, loss history) where history[0] is the loss
        before the first update and history[e] the mean minibatch loss of epoch e
    """
    if len(train_set) == 0:
        raise EmptyEvaluationSet("training set has no samples")
    if int(np.max(train_set.labels)) >= c.class_count:
        raise ShapeMismatch(f"labels exceed class_count={c.class_count}")

    model = copy.deepcopy(c)
    if tc.epochs == 0:
        return model, []

    with torch.no_grad():
        feats = model.features(torch.from_numpy(np.array(train_set.waveforms, dtype=np.float64)))
    labels = torch.from_numpy(np.asarray(train_set.labels, dtype=np.int64))
    model.fit_feature_standardization(feats)

    history = [_mean_loss(model, feats, labels)]
    logger.info(f"🏋️ Training: n={len(train_set)}, epochs={tc.epochs}, initial loss={history[0]:.4f}")

    optimizer = torch.optim.SGD(model.parameters(), lr=tc.learning_rate, momentum=tc.momentum)
    generator = torch.Generator().manual_seed(tc.seed)
    n = feats.shape[0]

    model.train()
    for epoch in range(tc.epochs):
        order = torch.randperm(n, generator=generator)
        total, batches = 0.0, 0
        for start in range(0, n, tc.batch_size):
            idx = order[start:start + tc.batch_size]
            loss = F.cross_entropy(model.logits_from_features(feats[idx]), labels[idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += float(loss)
            batches += 1
        history.append(total / batches)
        logger.debug(f"epoch {epoch + 1}/{tc.epochs}: loss={history[-1]:.4f}")
    model.eval()

    model.quantize_parameters()
    logger.info(f"✅ Training done: final loss={history[-1]:.4f}")
    return model, history
