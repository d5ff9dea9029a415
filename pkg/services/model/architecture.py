"""
Classifier architecture: two strided convolutions with ReLU, one dense layer.
"""

from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field

from services.core.errors import InvalidArch
from services.signal.config import PipelineConfig


def _conv_out(size: int, kernel: int, stride: int) -> int:
    return (size - kernel) // stride + 1


class ArchConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    conv1_channels: int = Field(default=8, ge=1)
    conv1_kernel: Tuple[int, int] = (8, 4)
    conv1_stride: int = Field(default=2, ge=1)
    conv2_channels: int = Field(default=16, ge=1)
    conv2_kernel: Tuple[int, int] = (4, 2)
    conv2_stride: int = Field(default=2, ge=1)

    def output_shapes(self, pipeline: PipelineConfig) -> Dict[str, Tuple[int, ...]]:
        """
        Spatial shapes after each stage for the MFCC input of `pipeline`.

        Raises:
            InvalidArch: a kernel does not fit its input
        """
        h, w = pipeline.mfcc_shape
        h1 = _conv_out(h, self.conv1_kernel[0], self.conv1_stride)
        w1 = _conv_out(w, self.conv1_kernel[1], self.conv1_stride)
        if h1 < 1 or w1 < 1:
            raise InvalidArch(f"conv1 kernel {self.conv1_kernel} does not fit input {(h, w)}")
        h2 = _conv_out(h1, self.conv2_kernel[0], self.conv2_stride)
        w2 = _conv_out(w1, self.conv2_kernel[1], self.conv2_stride)
        if h2 < 1 or w2 < 1:
            raise InvalidArch(f"conv2 kernel {self.conv2_kernel} does not fit input {(h1, w1)}")
        return {
            "input": (h, w),
            "conv1": (self.conv1_channels, h1, w1),
            "conv2": (self.conv2_channels, h2, w2),
            "dense_in": (self.conv2_channels * h2 * w2,),
        }
