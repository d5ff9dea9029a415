"""
LabeledDataset: an immutable stack of equal-length waveforms with labels.
"""

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from services.core.errors import ShapeMismatch
from services.numeric.sampling import rng
from services.signal.pipeline import Waveform

PAPER_CLASS_NAMES: Tuple[str, ...] = (
    "silence", "unknown", "yes", "no", "up", "down",
    "left", "right", "on", "off", "stop", "go",
)
DESK_CLASS_NAMES: Tuple[str, ...] = ("silence", "unknown", "yes", "no", "left", "right")


@dataclass(frozen=True)
class LabeledDataset:
    waveforms: np.ndarray          # n x input_len
    labels: np.ndarray             # n, int
    class_names: Tuple[str, ...]
    split_tag: str
    sample_rate_hz: int

    def __post_init__(self):
        waveforms = np.asarray(self.waveforms, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if waveforms.ndim != 2 or labels.shape != (waveforms.shape[0],):
            raise ShapeMismatch(
                f"waveforms {waveforms.shape} and labels {labels.shape} do not line up"
            )
        k = len(self.class_names)
        if labels.size and (labels.min() < 0 or labels.max() >= k):
            raise ShapeMismatch(f"labels must lie in [0, {k})")
        waveforms.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "waveforms", waveforms)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def input_len(self) -> int:
        return int(self.waveforms.shape[1])

    def items(self) -> Iterator[Tuple[Waveform, int]]:
        for samples, label in zip(self.waveforms, self.labels):
            yield Waveform(samples, self.sample_rate_hz), int(label)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

    def class_index(self, name: str) -> int:
        return self.class_names.index(name)

    def subset(self, indices: Sequence[int], split_tag: str = None) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            waveforms=self.waveforms[indices],
            labels=self.labels[indices],
            class_names=self.class_names,
            split_tag=split_tag or self.split_tag,
            sample_rate_hz=self.sample_rate_hz,
        )

    def take_per_class(self, n: int, seed: int) -> "LabeledDataset":
        """Stratified subset of at most n inputs per class, in dataset order."""
        stream = rng(seed)
        chosen = []
        for label in range(self.class_count):
            members = np.flatnonzero(self.labels == label)
            if members.size > n:
                members = np.sort(stream.permutation(members)[:n])
            chosen.append(members)
        return self.subset(np.sort(np.concatenate(chosen)))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.waveforms, dtype="<f4").tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype="<i8").tobytes())
        return h.hexdigest()

    def manifest(self) -> Dict:
        return {
            "split_tag": self.split_tag,
            "class_names": list(self.class_names),
            "class_counts": self.class_counts().tolist(),
            "size": len(self),
            "input_len": self.input_len,
            "sample_rate_hz": self.sample_rate_hz,
            "labels": self.labels.tolist(),
            "digest": self.digest(),
        }
