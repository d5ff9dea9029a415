"""
Attacks

- perturbation: Perturbation type, provenance and norm orders
- projection: l2 / l_inf ball projection
- deepfool: DeepFool with a restricted class set
- uap_hc: universal perturbations by hill climbing over DeepFool steps
- target_confidence: projected gradient ascent on one class confidence
- random_perturbations: random waveform noise and induced feature perturbations
"""

from .perturbation import Perturbation, Provenance, norm_order
from .projection import project_lp, quantize_into_ball
from .deepfool import DeepFoolResult, deepfool
from .uap_hc import AttackTrace, TraceEntry, UapConfig, UapResult, uap_hc
from .target_confidence import TargetAttackResult, run_target_trials, target_confidence_attack
from .random_perturbations import feature_perturbation, induced_feature_norms, random_waveform_perturbation

__all__ = [
    'Perturbation',
    'Provenance',
    'norm_order',
    'project_lp',
    'quantize_into_ball',
    'DeepFoolResult',
    'deepfool',
    'AttackTrace',
    'TraceEntry',
    'UapConfig',
    'UapResult',
    'uap_hc',
    'TargetAttackResult',
    'run_target_trials',
    'target_confidence_attack',
    'feature_perturbation',
    'induced_feature_norms',
    'random_waveform_perturbation',
]
