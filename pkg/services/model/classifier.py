"""
Classifiers

BaseClassifier holds everything attacks and reports need from a model:
features of raw waveforms, logits, softmax confidences, argmax
predictions (ties go to the lowest index) and float32 quantization.

- SpeechCommandNet: conv(8, 8x4, /2) -> ReLU -> conv(16, 4x2, /2) -> ReLU -> dense,
  fed with standardized MFCC features
- LinearClassifier: identity features, linear logits (analytic oracles)
"""

import logging
from typing import Tuple, Union

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from services.core.errors import InvalidArch, ShapeMismatch
from services.core.runtime import DTYPE
from services.signal.config import PipelineConfig, Representation
from services.signal.pipeline import MfccFeatures, Waveform, transform_tensor
from .architecture import ArchConfig

logger = logging.getLogger(__name__)

PREDICT_BATCH = 256


class BaseClassifier(nn.Module):
    """Differentiable classifier over raw waveforms."""

    class_count: int
    input_len: int
    feature_shape: Tuple[int, ...]

    # ------------------------------------------------------------------ tensors

    def features(self, x: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def logits_from_features(self, feats: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def logits_from_waveform(self, x: torch.Tensor) -> torch.Tensor:
        return self.logits_from_features(self.features(x))

    def scores(self, x: torch.Tensor, space: str = "logits") -> torch.Tensor:
        """Pre-softmax logits or post-softmax confidences of waveforms x."""
        logits = self.logits_from_waveform(x)
        if space == "logits":
            return logits
        if space == "probs":
            return torch.softmax(logits, dim=-1)
        raise ValueError(f"unknown score space '{space}'")

    def fit_feature_standardization(self, feats: torch.Tensor) -> None:
        """Hook for classifiers that standardize their inputs (no-op by default)."""

    def quantize_parameters(self) -> None:
        """Round every parameter and buffer to float32-representable values."""
        with torch.no_grad():
            for tensor in list(self.parameters()) + list(self.buffers()):
                tensor.copy_(tensor.float().to(DTYPE))

    # ------------------------------------------------------------------ numpy API

    def _feature_batch(self, feats) -> Tuple[torch.Tensor, bool]:
        values = feats.values if isinstance(feats, MfccFeatures) else np.asarray(feats, dtype=np.float64)
        single = values.shape == tuple(self.feature_shape)
        if not single and values.shape[1:] != tuple(self.feature_shape):
            raise ShapeMismatch(f"features shape {values.shape}, expected {self.feature_shape}")
        batch = values[None] if single else values
        return torch.from_numpy(np.ascontiguousarray(batch)), single

    def forward_features(self, feats) -> np.ndarray:
        """Softmax confidences (f_1..f_k) for one feature tensor or a batch."""
        batch, single = self._feature_batch(feats)
        with torch.no_grad():
            probs = torch.softmax(self.logits_from_features(batch), dim=-1).numpy()
        return probs[0] if single else probs

    def predict_features_batch(self, feats: np.ndarray) -> np.ndarray:
        batch, _ = self._feature_batch(feats)
        out = []
        with torch.no_grad():
            for start in range(0, batch.shape[0], PREDICT_BATCH):
                logits = self.logits_from_features(batch[start:start + PREDICT_BATCH])
                out.append(np.argmax(logits.numpy(), axis=-1))
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

    def _waveform_batch(self, waveforms) -> torch.Tensor:
        values = np.asarray(waveforms, dtype=np.float64)
        if values.ndim == 1:
            values = values[None]
        if values.shape[1] != self.input_len:
            raise ShapeMismatch(f"waveforms have {values.shape[1]} samples, expected {self.input_len}")
        return torch.from_numpy(np.ascontiguousarray(values))

    def features_batch(self, waveforms) -> np.ndarray:
        x = self._waveform_batch(waveforms)
        with torch.no_grad():
            return self.features(x).numpy()

    def predict_batch(self, waveforms) -> np.ndarray:
        x = self._waveform_batch(waveforms)
        out = []
        with torch.no_grad():
            for start in range(0, x.shape[0], PREDICT_BATCH):
                logits = self.logits_from_waveform(x[start:start + PREDICT_BATCH])
                out.append(np.argmax(logits.numpy(), axis=-1))
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

    def confidences_batch(self, waveforms) -> np.ndarray:
        x = self._waveform_batch(waveforms)
        with torch.no_grad():
            return torch.softmax(self.logits_from_waveform(x), dim=-1).numpy()

    def predict(self, w: Union[Waveform, np.ndarray]) -> int:
        """argmax of the confidences; ties broken by the lowest class index."""
        samples = w.samples if isinstance(w, Waveform) else w
        return int(self.predict_batch(samples)[0])

    def confidences(self, w: Union[Waveform, np.ndarray]) -> np.ndarray:
        samples = w.samples if isinstance(w, Waveform) else w
        return self.confidences_batch(samples)[0]


class SpeechCommandNet(BaseClassifier):
    """Compact CNN over standardized MFCC features."""

    def __init__(self, arch: ArchConfig, pipeline: PipelineConfig, class_count: int, seed: int):
        super().__init__()
        if class_count < 2:
            raise InvalidArch(f"class_count must be >= 2, got {class_count}")
        shapes = arch.output_shapes(pipeline)

        self.arch = arch
        self.pipeline = pipeline
        self.class_count = class_count
        self.seed = seed
        self.input_len = pipeline.input_len
        self.feature_shape = pipeline.mfcc_shape

        self.conv1 = nn.Conv2d(1, arch.conv1_channels, arch.conv1_kernel, stride=arch.conv1_stride)
        self.conv2 = nn.Conv2d(arch.conv1_channels, arch.conv2_channels, arch.conv2_kernel,
                               stride=arch.conv2_stride)
        self.dense = nn.Linear(shapes["dense_in"][0], class_count)
        self.register_buffer("feature_mean", torch.zeros(pipeline.n_mfcc))
        self.register_buffer("feature_std", torch.ones(pipeline.n_mfcc))
        self.to(DTYPE)
        self._init_parameters(seed)

    def _init_parameters(self, seed: int) -> None:
        generator = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for layer in (self.conv1, self.conv2, self.dense):
                fan_in = layer.weight[0].numel()
                bound = 1.0 / np.sqrt(fan_in)
                for tensor in (layer.weight, layer.bias):
                    tensor.copy_(
                        (torch.rand(tensor.shape, generator=generator, dtype=DTYPE) * 2.0 - 1.0) * bound
                    )
        self.quantize_parameters()

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return transform_tensor(x, Representation.MFCC, self.pipeline)

    def fit_feature_standardization(self, feats: torch.Tensor) -> None:
        flat = feats.reshape(-1, feats.shape[-1])
        with torch.no_grad():
            self.feature_mean.copy_(flat.mean(dim=0))
            self.feature_std.copy_(flat.std(dim=0).clamp_min(1e-3))

    def logits_from_features(self, feats: torch.Tensor) -> torch.Tensor:
        lead = feats.shape[:-2]
        z = ((feats - self.feature_mean) / self.feature_std).reshape(-1, 1, *self.feature_shape)
        z = F.relu(self.conv1(z))
        z = F.relu(self.conv2(z))
        logits = self.dense(z.flatten(start_dim=1))
        return logits.reshape(*lead, self.class_count)


class LinearClassifier(BaseClassifier):
    """logits = W x + b directly on the waveform."""

    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        super().__init__()
        weight = np.asarray(weight, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64)
        if weight.ndim != 2 or bias.shape != (weight.shape[0],):
            raise InvalidArch(f"weight {weight.shape} and bias {bias.shape} do not line up")
        self.class_count = weight.shape[0]
        self.input_len = weight.shape[1]
        self.feature_shape = (weight.shape[1],)
        self.weight = nn.Parameter(torch.from_numpy(weight.copy()))
        self.bias = nn.Parameter(torch.from_numpy(bias.copy()))

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return x

    def logits_from_features(self, feats: torch.Tensor) -> torch.Tensor:
        return feats @ self.weight.T + self.bias


def init_classifier(arch: ArchConfig, pipeline: PipelineConfig, class_count: int, seed: int) -> SpeechCommandNet:
    """
    Fresh classifier with fan-in scaled uniform weights, deterministic per seed.

    Raises:
        InvalidArch: kernels do not fit the pipeline's MFCC shape
    """
    model = SpeechCommandNet(arch, pipeline, class_count, seed)
    model.eval()
    logger.info(f"🧠 Initialized classifier: k={class_count}, seed={seed}, input={pipeline.mfcc_shape}")
    return model
