"""
Experiment configuration

An experiment file is JSON: a `preset` ("desk" or "paper") plus override
keys deep-merged over that preset's defaults (lists are replaced, not
merged). Loading resolves every missing seed from the top-level seed, so
the resolved config serializes to a fully concrete file that parses back
to the same config.
"""

import json
import logging
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import LAB_OUTPUT_DIR
from services.attacks.uap_hc import UapConfig
from services.core.errors import InvalidConfig
from services.dataset.labeled import DESK_CLASS_NAMES, PAPER_CLASS_NAMES
from services.dominance.detection import DEFAULT_THRESHOLD
from services.model.architecture import ArchConfig
from services.model.training import TrainConfig
from services.signal.config import PipelineConfig, get_preset

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class DataSection(_Section):
    source: Literal["synthetic", "wav"] = "synthetic"
    class_names: List[str]
    train_per_class: int = Field(ge=1)
    test_per_class: int = Field(ge=1)
    noise_level: float = Field(default=0.1, ge=0.0, lt=1.0)
    wav_dir: Optional[str] = None
    test_fraction: float = Field(default=0.33, gt=0.0, lt=1.0)
    seed: int


class ModelSection(_Section):
    arch: ArchConfig = ArchConfig()
    epochs: int = Field(ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    seed: int

    def train_config(self) -> TrainConfig:
        return TrainConfig(epochs=self.epochs, batch_size=self.batch_size,
                           learning_rate=self.learning_rate, momentum=self.momentum, seed=self.seed)


class UapSection(_Section):
    xi: float = Field(gt=0.0)
    p: Union[Literal[2], Literal["inf"]] = 2
    delta: float = Field(default=0.2, ge=0.0, le=1.0)
    i_max: int = Field(default=5, ge=0)
    inputs_per_class: int = Field(ge=1)
    restrictions: List[List[str]] = Field(default_factory=lambda: [[], ["left"], ["left", "unknown"]])
    n_perturbations: int = Field(default=5, ge=1)
    seeds: List[int]
    fr_sample_size: Optional[int] = Field(default=None, ge=1)
    seed: int

    @model_validator(mode="after")
    def _check_seeds(self):
        if len(self.seeds) != self.n_perturbations:
            raise ValueError(f"uap.seeds has {len(self.seeds)} entries, n_perturbations is {self.n_perturbations}")
        return self

    def uap_config(self, restricted, seed: int) -> UapConfig:
        return UapConfig(xi=self.xi, p=self.p, delta=self.delta, i_max=self.i_max,
                         restricted=tuple(restricted), seed=seed, fr_sample_size=self.fr_sample_size)


class TargetSection(_Section):
    xi: float = Field(gt=0.0)
    iters: int = Field(default=100, ge=0)
    step: float = Field(default=0.01, gt=0.0)
    trials: int = Field(ge=1)
    targets: Optional[List[str]] = None
    seed: int


class DeepFoolSection(_Section):
    per_class: int = Field(ge=1)
    seed: int


class DominanceSection(_Section):
    alpha: float = DEFAULT_THRESHOLD
    beta: float = DEFAULT_THRESHOLD
    zeta: float = DEFAULT_THRESHOLD
    only_correct: bool = True
    estimator: Literal["figure", "literal"] = "figure"


class SvdSection(_Section):
    matrix_per_class: int = Field(ge=1)
    ns: List[int]
    scales: List[float]
    trials: int = Field(ge=1)
    vector_count: int = Field(ge=1)
    vector_scales: List[float]
    volume_samples: int = Field(ge=1)
    random_l2: float = Field(default=0.1, gt=0.0)
    seed: int


class ExperimentConfig(_Section):
    preset: Literal["desk", "paper"]
    seed: int = 0
    output_dir: str = LAB_OUTPUT_DIR
    pipeline: PipelineConfig
    data: DataSection
    model: ModelSection
    uap: UapSection
    target: TargetSection
    deepfool: DeepFoolSection
    dominance: DominanceSection = DominanceSection()
    svd: SvdSection

    @model_validator(mode="after")
    def _check_class_names(self):
        names = set(self.data.class_names)
        unknown = sorted({n for group in self.uap.restrictions for n in group} - names)
        unknown += sorted(set(self.target.targets or []) - names)
        if unknown:
            raise ValueError(f"unknown class names {unknown}; classes are {self.data.class_names}")
        return self

    def restriction_tag(self, names: List[str]) -> str:
        return "+".join(names) if names else "none"


# ============================================================================
# PRESETS
# ============================================================================

PRESET_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "desk": {
        "pipeline": get_preset("desk").model_dump(mode="json"),
        "data": {"class_names": list(DESK_CLASS_NAMES), "train_per_class": 100, "test_per_class": 50},
        "model": {"epochs": 30, "learning_rate": 0.01},
        "uap": {"xi": 1.0, "inputs_per_class": 20, "n_perturbations": 5},
        "target": {"xi": 1.0, "trials": 20},
        "deepfool": {"per_class": 20},
        "dominance": {},
        "svd": {
            "matrix_per_class": 50, "ns": [5, 10, 20, 40],
            "scales": [-40.0, -20.0, -10.0, -5.0, 5.0, 10.0, 20.0, 40.0],
            "trials": 20, "vector_count": 20, "vector_scales": [-10.0, 10.0], "volume_samples": 10000,
        },
    },
    "paper": {
        "pipeline": get_preset("paper").model_dump(mode="json"),
        "data": {"class_names": list(PAPER_CLASS_NAMES), "train_per_class": 100, "test_per_class": 50},
        "model": {"epochs": 30, "learning_rate": 0.01},
        "uap": {"xi": 0.1, "inputs_per_class": 100, "n_perturbations": 10},
        "target": {"xi": 0.1, "trials": 100},
        "deepfool": {"per_class": 100},
        "dominance": {},
        "svd": {
            "matrix_per_class": 100, "ns": [10, 50, 100, 200, 500],
            "scales": [-200.0, -100.0, -50.0, 50.0, 100.0, 200.0],
            "trials": 20, "vector_count": 250, "vector_scales": [-100.0, 100.0], "volume_samples": 1000000,
        },
    },
}

SEED_SALTS = {"data": 1, "model": 2, "uap": 3, "target": 4, "deepfool": 5, "svd": 6}
UAP_SEED_SALT = 100


def derive_seed(seed: int, salt: int) -> int:
    """Deterministic 32-bit sub-seed of (seed, salt)."""
    return int(np.random.SeedSequence([seed, salt]).generate_state(1)[0])


def deep_merge(base: Dict, override: Dict) -> Dict:
    merged = deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = deepcopy(value)
    return merged


def resolve_experiment(raw: Dict, seed: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    """
    Merge `raw` over its preset, apply CLI overrides and fill every seed.

    Raises:
        InvalidConfig: unknown preset, schema violation or unknown class name
    """
    preset = raw.get("preset", "desk")
    if preset not in PRESET_DEFAULTS:
        raise InvalidConfig(f"unknown preset '{preset}', expected one of {sorted(PRESET_DEFAULTS)}")
    merged = deep_merge(PRESET_DEFAULTS[preset], raw)
    merged["preset"] = preset
    if seed is not None:
        merged["seed"] = seed
    if out is not None:
        merged["output_dir"] = out
    top = merged.setdefault("seed", 0)

    for section, salt in SEED_SALTS.items():
        if merged[section].get("seed") is None:
            merged[section]["seed"] = derive_seed(top, salt)
    uap = merged["uap"]
    if uap.get("seeds") is None:
        count = uap.get("n_perturbations", 5)
        uap["seeds"] = [derive_seed(uap["seed"], UAP_SEED_SALT + i) for i in range(count)]
    elif "n_perturbations" not in raw.get("uap", {}):
        uap["n_perturbations"] = len(uap["seeds"])

    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        raise InvalidConfig(f"invalid experiment config: {e}")


def load_experiment(path=None, seed: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    """Resolve an experiment file; without a path the desk preset is used as is."""
    if path is None:
        return resolve_experiment({}, seed, out)
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfig(f"config file {path} not found")
    except json.JSONDecodeError as e:
        raise InvalidConfig(f"{path} is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise InvalidConfig(f"{path} must hold a JSON object")
    cfg = resolve_experiment(raw, seed, out)
    logger.info(f"📋 Loaded experiment {path}: preset={cfg.preset}, seed={cfg.seed}")
    return cfg


def dump_experiment(cfg: ExperimentConfig) -> Dict:
    return cfg.model_dump(mode="json")
