# tests/conftest.py
from pathlib import Path

import numpy as np
import pytest

from app.core.config import settings

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(autouse=True)
def _clean_settings():
    # CLI и тесты конфигурации меняют глобальный settings
    settings.set_cfg({})
    yield
    settings.set_cfg({})
    settings._config_path = None


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR
