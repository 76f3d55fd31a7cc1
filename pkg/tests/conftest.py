from __future__ import annotations

from pathlib import Path

import pytest

from aiskintojas.nodes.inference_fit import FitConfig
from aiskintojas.utils.responses import Dataset, read_responses_csv

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # .env ar aplinka neturi itakoti testu.
    for name in (
        "AISKINTOJAS_EPSILON",
        "AISKINTOJAS_CF_MODE",
        "AISKINTOJAS_RESTARTS",
        "AISKINTOJAS_L1",
        "AISKINTOJAS_MAX_ITERATIONS",
        "AISKINTOJAS_LOG_LEVEL",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr("aiskintojas.pipeline.load_dotenv", lambda *a, **k: False)


@pytest.fixture
def golden_path() -> Path:
    return DATA_DIR / "responses_golden.csv"


@pytest.fixture
def golden(golden_path) -> Dataset:
    return read_responses_csv(golden_path)


@pytest.fixture
def quick_config() -> FitConfig:
    """Mazai pradziu, laisva tolerancija: greitiems pritaikymo testams."""
    return FitConfig(restarts=2, max_iterations=2000, convergence_tol=1e-6, seed=3)
