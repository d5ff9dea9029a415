"""
Perturbation geometry

- matrices: DeepFool / random / uniform-feature perturbation matrices
- decay: singular-value decay fits
- sweep: fooling rates of perturbations sampled from singular subspaces
- vector_eval: fooling rate and dominant-class attribution per singular vector
- volume_probe: class histogram of uniformly random inputs
"""

from .matrices import (
    DeepFoolBatch,
    MatrixKind,
    PerturbationMatrix,
    build_matrix,
    compute_deepfool_perturbations,
)
from .decay import DecayEntry, decay_report, lambda_table
from .sweep import SubspaceSweepResult, sample_in_span, subspace_sweep
from .vector_eval import SingularVectorEval, singular_vector_eval
from .volume_probe import VolumeProbeResult, volume_probe

__all__ = [
    'DeepFoolBatch',
    'MatrixKind',
    'PerturbationMatrix',
    'build_matrix',
    'compute_deepfool_perturbations',
    'DecayEntry',
    'decay_report',
    'lambda_table',
    'SubspaceSweepResult',
    'sample_in_span',
    'subspace_sweep',
    'SingularVectorEval',
    'singular_vector_eval',
    'VolumeProbeResult',
    'volume_probe',
]
