"""
Exact waveform-space gradients of class scores.

Scores are pre-softmax logits ("logits", used by DeepFool) or softmax
confidences ("probs", used by the target-confidence attack). Gradients
run through the dense, conv, MFCC and spectrogram stages by autograd.
"""

from typing import Sequence, Tuple

import numpy as np
import torch

from services.core.errors import ShapeMismatch
from .classifier import BaseClassifier


def _input_tensor(c: BaseClassifier, x) -> torch.Tensor:
    samples = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    if samples.shape != (c.input_len,):
        raise ShapeMismatch(f"input shape {samples.shape}, expected ({c.input_len},)")
    return torch.from_numpy(samples.copy()).requires_grad_(True)


def class_gradients(c: BaseClassifier, x, classes: Sequence[int],
                    space: str = "logits") -> Tuple[np.ndarray, np.ndarray]:
    """
    Scores of every class and gradients of the requested ones from one forward pass.

    Returns:
        (scores over all k classes, len(classes) x input_len gradient matrix)
    """
    xt = _input_tensor(c, x)
    scores = c.scores(xt[None], space)[0]
    grads = np.zeros((len(classes), c.input_len))
    for row, cls in enumerate(classes):
        (g,) = torch.autograd.grad(scores[cls], xt, retain_graph=row < len(classes) - 1)
        grads[row] = g.numpy()
    return scores.detach().numpy(), grads


def input_gradient(c: BaseClassifier, w, j: int, i: int, space: str = "logits",
                   strict: bool = True) -> np.ndarray:
    """
    Gradient of f_j - f_i with respect to the waveform samples.

    With strict=False, j == i is allowed and yields an exact zero vector.
    """
    if j == i:
        if strict:
            raise ValueError(f"input_gradient needs two distinct classes, got {j} twice")
        return np.zeros(c.input_len)
    xt = _input_tensor(c, w)
    scores = c.scores(xt[None], space)[0]
    (g,) = torch.autograd.grad(scores[j] - scores[i], xt)
    return g.numpy()
