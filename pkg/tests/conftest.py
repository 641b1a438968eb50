import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("suite", max_examples=50, deadline=None, derandomize=True)
settings.load_profile("suite")

REPO = Path(__file__).resolve().parents[1]
GOLDENS = REPO / "tests" / "goldens"
DATA = REPO / "src" / "robustxai" / "data"
ADAPTER_SRC = REPO / "adapter" / "src"


def load_golden(name: str) -> dict:
    return json.loads((GOLDENS / name).read_text())


def load_data(name: str) -> dict:
    return json.loads((DATA / name).read_text())


@pytest.fixture(scope="session")
def toy2d_probes():
    return load_data("toy2d_probes.json")


@pytest.fixture(scope="session")
def benchmark_fhat():
    return load_data("benchmark_fhat.json")


def assert_close(actual, expected, tol, label=""):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    err = np.max(np.abs(actual - expected)) if actual.size else 0.0
    assert err <= tol, f"{label}: max abs err {err} > {tol}"
