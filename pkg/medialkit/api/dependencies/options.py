import typer

from medialkit.core.numeric import Tolerances, default_tolerances


def parse_numbers(text: str) -> list[float]:
    """Comma-separated numbers, e.g. "0,0.5" or "-2,-2,2,2"."""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}") from exc


def coords_option(text: str | None) -> list[float] | None:
    if text is None:
        return None
    values = parse_numbers(text)
    if len(values) not in (2, 3):
        raise typer.BadParameter(f"points need 2 or 3 coordinates, got {len(values)}")
    return values


def numbers_option(text: str | None) -> list[float] | None:
    if text is None:
        return None
    values = parse_numbers(text)
    if not values:
        raise typer.BadParameter("expected at least one number")
    return values


def get_tolerances(ctx: typer.Context) -> Tolerances:
    """Tolerances stored by the root callback (defaults when a command runs standalone)."""
    root = ctx.find_root()
    if isinstance(root.obj, dict) and "tol" in root.obj:
        return root.obj["tol"]
    return default_tolerances()
