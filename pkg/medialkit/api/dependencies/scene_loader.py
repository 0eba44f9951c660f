from pathlib import Path

from medialkit.core.config import get_settings
from medialkit.core.errors import ParseError
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.services.scene import Scene, load_scene


logger = get_run_logger("scene_loader")

SCENE_SUFFIX = ".scene"


def resolve_scene_path(name: str) -> Path:
    """
    Resolve a scene argument to a file.

    Rules:
    - an existing path is used as given
    - otherwise the name is looked up in the scenes directory (MEDIALKIT_SCENES)
    - the ".scene" suffix is optional
    """
    given = Path(name)
    if given.is_file():
        return given

    scenes_dir = get_settings().scenes
    for candidate in (scenes_dir / name, scenes_dir / f"{name}{SCENE_SUFFIX}"):
        if candidate.is_file():
            return candidate
    raise ParseError(f"scene {name!r} not found (looked in {scenes_dir})")


def get_scene(name: str) -> Scene:
    path = resolve_scene_path(name)
    logger.debug("scene resolved", extra={"event": "scene_resolved", "path": str(path)})
    return load_scene(path)
