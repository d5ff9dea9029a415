"""
Shared pytest fixtures: the desk pipeline, a pinned synthetic split and a
classifier trained on it once per session.
"""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from services.dataset.splits import split
from services.dataset.synthetic import SynthSpec, generate_synthetic
from services.model.architecture import ArchConfig
from services.model.classifier import LinearClassifier, init_classifier
from services.model.training import TrainConfig, train
from services.signal.config import get_preset

DESK_SEED = 20240611
FIXTURES = Path(__file__).parent / "fixtures"
# "1" writes missing golden files instead of failing
RECORD_GOLDEN = os.getenv("LAB_RECORD_GOLDEN", "0") == "1"


@pytest.fixture(scope="session")
def desk_pipeline():
    return get_preset("desk")


@pytest.fixture(scope="session")
def desk_split(desk_pipeline):
    """100 train / 50 test inputs per class, six classes."""
    full = generate_synthetic(SynthSpec(per_class=150, seed=DESK_SEED), desk_pipeline, split_tag="all")
    return split(full, 100 / 150, DESK_SEED)


@pytest.fixture(scope="session")
def desk_train(desk_split):
    return desk_split[0]


@pytest.fixture(scope="session")
def desk_test(desk_split):
    return desk_split[1]


@pytest.fixture(scope="session")
def trained(desk_pipeline, desk_train):
    """(classifier, loss history) after the default 30 epochs."""
    model = init_classifier(ArchConfig(), desk_pipeline, desk_train.class_count, seed=1)
    return train(model, desk_train, TrainConfig(epochs=30, seed=2))


@pytest.fixture(scope="session")
def desk_model(trained):
    return trained[0]


@pytest.fixture
def linear_factory():
    """Random LinearClassifier(d, k) built from a seeded stream."""
    def build(seed: int, d: int = 50, k: int = 5) -> LinearClassifier:
        stream = np.random.default_rng(seed)
        return LinearClassifier(stream.standard_normal((k, d)), stream.standard_normal(k))
    return build


def read_golden(directory: Path, name: str, value, record: bool = False):
    """Stored value of <directory>/<name>.json. A missing file fails unless record is set."""
    path = directory / f"{name}.json"
    if not path.exists():
        if not record:
            pytest.fail(f"missing golden fixture {path.name}; rerun with LAB_RECORD_GOLDEN=1 to record it")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(value, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return json.loads(path.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def golden():
    """check(name, value) against fixtures/<name>.json."""
    def check(name: str, value):
        return read_golden(FIXTURES, name, value, record=RECORD_GOLDEN)
    return check
