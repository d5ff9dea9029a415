"""
Stratified train/test split.
"""

import logging
from typing import Tuple

import numpy as np

from services.core.errors import ClassTooSmall
from services.numeric.sampling import rng
from .labeled import LabeledDataset

logger = logging.getLogger(__name__)


def split(ds: LabeledDataset, fraction: float, seed: int) -> Tuple[LabeledDataset, LabeledDataset]:
    """
    Split every class into a `fraction` train share and the remaining test share.

    Each side keeps at least one item per class; indices keep dataset order.

    Raises:
        ClassTooSmall: a class has fewer than 2 items
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")

    counts = ds.class_counts()
    small = [ds.class_names[c] for c in range(ds.class_count) if counts[c] < 2]
    if small:
        raise ClassTooSmall(f"classes with fewer than 2 items: {', '.join(small)}", classes=small)

    stream = rng(seed)
    train_idx, test_idx = [], []
    for label in range(ds.class_count):
        members = stream.permutation(np.flatnonzero(ds.labels == label))
        n_train = int(np.clip(round(fraction * members.size), 1, members.size - 1))
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])

    train = ds.subset(np.sort(np.concatenate(train_idx)), split_tag="train")
    test = ds.subset(np.sort(np.concatenate(test_idx)), split_tag="test")
    logger.info(f"✂️ Split {len(ds)} items into {len(train)} train / {len(test)} test")
    return train, test
