"""Fixtures partagées: scènes livrées sous backend/data/scenes."""
from __future__ import annotations

from pathlib import Path

import pytest

from backend.models import load_scene

SCENES_DIR = Path(__file__).resolve().parent.parent / "data" / "scenes"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: contrôles à l'échelle d'un corpus (plusieurs secondes)")


@pytest.fixture
def scene_path():
    def _path(name: str) -> Path:
        return SCENES_DIR / f"{name}.json"

    return _path


@pytest.fixture
def load():
    """Charge une scène livrée et renvoie le SceneSpec."""

    def _load(name: str):
        return load_scene(SCENES_DIR / f"{name}.json").to_scene()

    return _load
