from contextvars import ContextVar
from typing import Optional

run_id_ctx: ContextVar[Optional[str]] = ContextVar("run_id", default=None)
command_ctx: ContextVar[Optional[str]] = ContextVar("command", default=None)
scene_ctx: ContextVar[Optional[str]] = ContextVar("scene", default=None)


def set_run_context(
    *,
    run_id: str,
    command: str | None = None,
    scene: str | None = None,
):
    run_id_ctx.set(run_id)
    command_ctx.set(command)
    scene_ctx.set(scene)


def set_scene_context(scene: str | None):
    scene_ctx.set(scene)


def get_logging_context() -> dict:
    return {
        "run_id": run_id_ctx.get(),
        "command": command_ctx.get(),
        "scene": scene_ctx.get(),
    }
