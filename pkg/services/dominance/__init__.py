"""
Dominant-class analysis

- snapshots: clean / perturbed predictions of a dataset under a perturbation
- distribution: misclassification distribution p and transition matrix t
- detection: attractor pairs, dominant classes, DominanceReport
- fooling: fooling rates and their exclusion variants
- factors: F1 / F2 / F3 and Pearson correlations
- reports: JSON, CSV and gnuplot writers
"""

from .snapshots import PredictionSnapshot, as_snapshot, clean_predictions, take_snapshot
from .distribution import TransitionMatrix, dominant_class, misclass_distribution, transition_matrix
from .fooling import (
    VARIANTS,
    aggregate_fooling_table,
    fooling_counts,
    fooling_rate,
    fooling_rate_variants,
    per_class_fooling_rate,
)
from .detection import DEFAULT_THRESHOLD, DominanceReport, detect, dominance_report
from .factors import Factors, factor_correlations, factors, pearson

__all__ = [
    'PredictionSnapshot',
    'as_snapshot',
    'clean_predictions',
    'take_snapshot',
    'TransitionMatrix',
    'dominant_class',
    'misclass_distribution',
    'transition_matrix',
    'VARIANTS',
    'aggregate_fooling_table',
    'fooling_counts',
    'fooling_rate',
    'fooling_rate_variants',
    'per_class_fooling_rate',
    'DEFAULT_THRESHOLD',
    'DominanceReport',
    'detect',
    'dominance_report',
    'Factors',
    'factor_correlations',
    'factors',
    'pearson',
]
