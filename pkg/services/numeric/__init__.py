"""
Numerical kernels

- svd: one-sided Jacobi thin SVD and row normalization
- curve_fit: exponential decay fit of singular-value series
- sampling: seeded, splittable random streams
"""

from .sampling import rng, split_streams, sample_uniform, sample_unit_sphere, quantize_f32
from .svd import SvdResult, thin_svd, normalize_rows
from .curve_fit import ExpFit, fit_exp_decay

__all__ = [
    'rng',
    'split_streams',
    'sample_uniform',
    'sample_unit_sphere',
    'quantize_f32',
    'SvdResult',
    'thin_svd',
    'normalize_rows',
    'ExpFit',
    'fit_exp_decay',
]
