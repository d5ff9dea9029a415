"""
Command layer

- experiment_config: ExperimentConfig, presets, seed resolution
- commands: handlers behind every `lab` command
"""

from .experiment_config import ExperimentConfig, dump_experiment, load_experiment, resolve_experiment
from .commands import cmd_attack, cmd_dominance, cmd_eval, cmd_gen_data, cmd_svd, cmd_train

__all__ = [
    'ExperimentConfig',
    'dump_experiment',
    'load_experiment',
    'resolve_experiment',
    'cmd_attack',
    'cmd_dominance',
    'cmd_eval',
    'cmd_gen_data',
    'cmd_svd',
    'cmd_train',
]
