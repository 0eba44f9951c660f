from pathlib import Path

import typer

from medialkit.core.logging.run_logger import get_run_logger
from medialkit.schemas.report import Report


logger = get_run_logger("reporting")


def emit_report(report: Report, path: Path | None = None) -> None:
    """
    Print the report as JSON on stdout (and to `path` when given).
    A failed assertion ends the command with exit code 1.
    """
    # results are filled after construction; re-validate into plain JSON values
    report = Report.model_validate(report.model_dump(by_alias=True))
    text = report.model_dump_json(indent=2, by_alias=True)
    typer.echo(text)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")

    failed = [a.name for a in report.assertions if not a.passed]
    if failed:
        logger.warning(
            "assertions failed",
            extra={"event": "assertions_failed", "failed": failed[:20], "count": len(failed)},
        )
        raise typer.Exit(code=1)
