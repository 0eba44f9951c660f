from pathlib import Path
from typing import Annotated, Optional

import typer

from medialkit.api.dependencies.options import get_tolerances
from medialkit.api.dependencies.reporting import emit_report
from medialkit.api.dependencies.scene_loader import get_scene
from medialkit.core.logging.command_logger import logged_command
from medialkit.services.suites import SUITES, run_suite


# == ✅ Router
router = typer.Typer(help="Golden verification suites.")

SUITE_NAMES = [*SUITES, "all"]


def suite_option(name: str) -> str:
    if name not in SUITE_NAMES:
        raise typer.BadParameter(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    return name


# ✅ === VERIFY ===
@router.command("verify")
@logged_command("verify")
def verify_command(
    ctx: typer.Context,
    suite: Annotated[str, typer.Argument(callback=suite_option, help=f"one of: {', '.join(SUITE_NAMES)}")],
    report: Annotated[Optional[Path], typer.Option("--report", help="also write the JSON report here")] = None,
):
    """Run a golden suite over the shipped scenes; exit 1 when any assertion fails."""
    tol = get_tolerances(ctx)
    emit_report(run_suite(suite, get_scene, tol), report)
