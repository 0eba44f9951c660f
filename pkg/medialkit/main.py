import sys
from typing import Annotated, Sequence

import click
import typer
from rich.console import Console

from medialkit.api.v1 import queries, verify
from medialkit.core.errors import MedialKitError
from medialkit.core.logging.logging_config import setup_logging
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import make_tolerances


# == ✅ Logging
logger = get_run_logger("main")
stderr = Console(stderr=True)

# == ✅ App
app = typer.Typer(
    name="medialkit",
    help="Medial axis, distance derivatives, tangent cones and reaching radii of planar and spatial sets.",
    no_args_is_help=True,
    pretty_exceptions_enable=False,
)


@app.callback()
def main_callback(
    ctx: typer.Context,
    seed: Annotated[int, typer.Option("--seed", help="seed of every sampled probe")] = 42,
):
    ctx.obj = {"tol": make_tolerances(seed=seed)}


# ✅ Registering commands
app.add_typer(queries.router)
app.add_typer(verify.router)


# ✅ Entry point with exit codes: 0 pass, 1 failed assertion, 2 input or geometry error
def run(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(sys.argv[1:] if argv is None else argv),
                              prog_name="medialkit", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        stderr.print("[red]aborted[/red]")
        return 2
    except MedialKitError as exc:
        logger.error("command failed", extra={"event": "command_error", "error": type(exc).__name__})
        stderr.print(f"[red]{type(exc).__name__}:[/red] {exc}", highlight=False)
        return 2
    # standalone_mode=False hands back typer.Exit codes as the return value
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(run())
