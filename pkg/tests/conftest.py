from pathlib import Path

import pytest

from medialkit.core.config import get_settings
from medialkit.core.numeric import default_tolerances
from medialkit.services.scene import Scene, load_scene


SCENES_DIR = Path(__file__).resolve().parent.parent / "scenes"


@pytest.fixture(autouse=True)
def quiet_settings(monkeypatch, tmp_path):
    """No log files from tests; scenes resolve against the shipped directory."""
    monkeypatch.setenv("MEDIALKIT_LOG_TO_FILE", "false")
    monkeypatch.setenv("MEDIALKIT_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("MEDIALKIT_SCENES", str(SCENES_DIR))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def tol():
    return default_tolerances()


_LOADED: dict[str, Scene] = {}


def _load(name: str) -> Scene:
    if name not in _LOADED:
        _LOADED[name] = load_scene(SCENES_DIR / f"{name}.scene")
    return _LOADED[name]


@pytest.fixture(scope="session")
def scene():
    """Loader of the golden scenes by name, each parsed once per session."""
    return _load
