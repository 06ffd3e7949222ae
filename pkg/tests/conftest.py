from __future__ import annotations

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENE_PATH = REPO_ROOT / "scenes" / "femur_default.yaml"
SCRIPT_DIR = REPO_ROOT / "scenes" / "scripts"


@pytest.fixture(scope="session")
def default_scene():
    from fracsim.sceneio import load_scene

    return load_scene(str(SCENE_PATH))


@pytest.fixture(scope="session")
def shipped_scripts():
    """Paths of the shipped device scripts, regenerating them when absent."""
    from fracsim.sceneio import load_scene
    from fracsim.scriptgen import SHIPPED_SCRIPTS, write_shipped_scripts

    if not all((SCRIPT_DIR / name).exists() for name in SHIPPED_SCRIPTS):
        write_shipped_scripts(load_scene(str(SCENE_PATH)), str(SCRIPT_DIR))
    return {name: SCRIPT_DIR / name for name in SHIPPED_SCRIPTS}
