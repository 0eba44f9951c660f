from pathlib import Path
from typing import Annotated, Optional

import typer

from medialkit.api.dependencies.options import coords_option, get_tolerances, numbers_option
from medialkit.api.dependencies.reporting import emit_report
from medialkit.api.dependencies.scene_loader import get_scene
from medialkit.core.errors import ValidationError
from medialkit.core.logging.command_logger import logged_command
from medialkit.core.logging.run_logger import get_run_logger
from medialkit.core.numeric import is_unbounded, radius_value
from medialkit.schemas.region import Region, make_region
from medialkit.schemas.report import Report
from medialkit.services.cone import compare_cone, sphere_medial
from medialkit.services.dimension import dim_m, verify_dim_formula
from medialkit.services.helpers.export import CSVExport
from medialkit.services.medial import scan_medial
from medialkit.services.mises import derivative_via_sphere, directional_derivative, finite_difference
from medialkit.services.nearest import distance, nearest_set
from medialkit.services.reach import DEFAULT_ETAS, frontier_classify, radius_report
from medialkit.services.scene import Scene
from medialkit.services.suites import SCANS


# == ✅ Logging
logger = get_run_logger("queries")

# == ✅ Router
router = typer.Typer(help="Single-scene queries.")

# == ✅ Shared options
SceneArg = Annotated[str, typer.Argument(help="scene file, or a name under the scenes directory")]
AtOpt = Annotated[str, typer.Option("--at", callback=coords_option, metavar="X,Y[,Z]", help="query point")]
DirOpt = Annotated[str, typer.Option("--dir", callback=coords_option, metavar="X,Y[,Z]", help="unit direction")]
BoxOpt = Annotated[Optional[str], typer.Option("--box", callback=numbers_option, metavar="LO...,HI...",
                                               help="scan box: lower corner then upper corner")]
StepOpt = Annotated[Optional[float], typer.Option("--step", help="scan grid step")]
ReportOpt = Annotated[Optional[Path], typer.Option("--report", help="also write the JSON report here")]


def _region(scene_name: str, s: Scene, box: list[float] | None, step: float | None) -> Region:
    """Explicit box/step, or the golden scan plan of a shipped scene."""
    if box is None or step is None:
        plan = SCANS.get(s.name) or SCANS.get(Path(scene_name).stem)
        if plan is None:
            raise ValidationError("--box and --step are required for this scene")
        box = list(plan.box) if box is None else box
        step = plan.step if step is None else step
        logger.info("golden scan plan used", extra={"event": "scan_plan", "box": box, "step": step})
    return make_region(box, step)


# ✅ === DISTANCE ===
@router.command("distance")
@logged_command("distance")
def distance_command(ctx: typer.Context, scene: SceneArg, at: AtOpt, report: ReportOpt = None):
    """Distance from a point to the scene."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    out = Report(command="distance", scene=s.name, parameters={"at": at})
    out.results["distance"] = distance(s, at, tol)
    emit_report(out, report)


# ✅ === NEAREST ===
@router.command("nearest")
@logged_command("nearest")
def nearest_command(ctx: typer.Context, scene: SceneArg, at: AtOpt, report: ReportOpt = None):
    """Nearest-point set: clusters, multiplicity and diameter."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    ns = nearest_set(s, at, tol)
    out = Report(command="nearest", scene=s.name, parameters={"at": at})
    out.results.update({
        "distance": ns.distance,
        "multiplicity": ns.multiplicity,
        "diameter": ns.diameter,
        "continuum": ns.continuum,
        "representatives": ns.representatives,
    })
    emit_report(out, report)


# ✅ === MEDIAL SCAN ===
@router.command("medial")
@logged_command("medial")
def medial_command(
    ctx: typer.Context,
    scene: SceneArg,
    box: BoxOpt = None,
    step: StepOpt = None,
    out: Annotated[Path, typer.Option("--out", help="CSV file of medial samples")] = Path("medial.csv"),
    report: ReportOpt = None,
):
    """Grid scan of the medial axis; samples go to a CSV file."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    region = _region(scene, s, box, step)
    cloud = scan_medial(s, region, tol)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = CSVExport.medial_cloud(cloud, out)

    rep = Report(command="medial", scene=s.name,
                 parameters={"box": [*region.lo, *region.hi], "step": region.step})
    rep.results.update({"samples": written, "csv": str(out), "label": cloud.label})
    emit_report(rep, report)


# ✅ === DIRECTIONAL DERIVATIVE ===
@router.command("derivative")
@logged_command("derivative")
def derivative_command(ctx: typer.Context, scene: SceneArg, at: AtOpt, direction: DirOpt, report: ReportOpt = None):
    """One-sided directional derivative with its finite-difference cross-check."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    result = directional_derivative(s, at, direction, tol)
    fd = finite_difference(s, at, direction, 1e-6, tol)
    sphere = derivative_via_sphere(s, at, direction, tol)

    out = Report(command="derivative", scene=s.name, parameters={"at": at, "dir": direction})
    out.results.update({
        "value": result.value,
        "witnesses": result.witnesses,
        "finite_difference": fd.value,
        "richardson": fd.richardson,
        "sphere_form": sphere,
    })
    out.check("finite_difference", expected=result.value, actual=fd.value, tolerance=1e-4,
              passed=abs(result.value - fd.value) <= 1e-4)
    out.check("sphere_form", expected=result.value, actual=sphere, tolerance=10 * tol.eps_cluster,
              passed=abs(result.value - sphere) <= 10 * tol.eps_cluster)
    emit_report(out, report)


# ✅ === TANGENT CONE ===
@router.command("cone")
@logged_command("cone")
def cone_command(
    ctx: typer.Context,
    scene: SceneArg,
    at: AtOpt,
    scales: Annotated[Optional[str], typer.Option("--scales", callback=numbers_option,
                                                  help="decreasing annulus scales")] = None,
    box: BoxOpt = None,
    step: StepOpt = None,
    out: Annotated[Optional[Path], typer.Option("--out", help="CSV file of tangent-cone directions")] = None,
    report: ReportOpt = None,
):
    """Tangent cone of the sampled medial axis against the medial axis of m(a)."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    region = _region(scene, s, box, step)
    cloud = scan_medial(s, region, tol)
    cmp = compare_cone(s, cloud, at, tol, scales)
    if out is not None:
        CSVExport.directions(cmp.tangent_cone, out)

    rep = Report(command="cone", scene=s.name,
                 parameters={"at": at, "scales": scales, "box": [*region.lo, *region.hi], "step": region.step})
    rep.results.update({
        "hausdorff_included": cmp.hausdorff_included,
        "hausdorff_equal": cmp.hausdorff_equal,
        "plane_case": cmp.plane_case,
        "diam_condition_holds": cmp.diam_condition_holds,
        "sphere_medial": cmp.sphere_medial.directions,
        "tangent_cone_size": len(cmp.tangent_cone),
    })
    rep.check("inclusion", expected="<= 0.1", actual=cmp.hausdorff_included, tolerance=0.1,
              passed=cmp.hausdorff_included <= 0.1)
    emit_report(rep, report)


# ✅ === SPHERE MEDIAL AXIS ===
@router.command("sphere-medial")
@logged_command("sphere-medial")
def sphere_medial_command(
    ctx: typer.Context,
    scene: SceneArg,
    at: AtOpt,
    out: Annotated[Optional[Path], typer.Option("--out", help="CSV file of medial directions")] = None,
    report: ReportOpt = None,
):
    """Medial axis of m(a) as unit directions."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    cloud = sphere_medial(s, at, tol)
    if out is not None:
        CSVExport.directions(cloud, out)
    rep = Report(command="sphere-medial", scene=s.name, parameters={"at": at})
    rep.results.update({"count": len(cloud), "directions": cloud.directions})
    emit_report(rep, report)


# ✅ === DIMENSION ===
@router.command("dim")
@logged_command("dim")
def dim_command(
    ctx: typer.Context,
    scene: SceneArg,
    at: AtOpt,
    nbhd: Annotated[float, typer.Option("--nbhd", help="neighbourhood radius of the k_min search")] = 0.5,
    box: BoxOpt = None,
    step: StepOpt = None,
    spectra_out: Annotated[Optional[Path], typer.Option("--spectra-out",
                                                        help="CSV file of the m(a) PCA spectra")] = None,
    report: ReportOpt = None,
):
    """dim_a M_X + min dim m = n - 1 around a point."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    region = _region(scene, s, box, step)
    cloud = scan_medial(s, region, tol)
    probe = verify_dim_formula(s, cloud, at, nbhd, tol)
    spectra = dim_m(s, at, tol)
    if spectra_out is not None:
        CSVExport.spectra(spectra, spectra_out)

    rep = Report(command="dim", scene=s.name,
                 parameters={"at": at, "nbhd": nbhd, "box": [*region.lo, *region.hi], "step": region.step})
    rep.results.update(probe.details)
    rep.results["dim_m_spectra"] = spectra.spectra
    rep.absorb(probe)
    emit_report(rep, report)


# ✅ === REACHING RADII ===
@router.command("radius")
@logged_command("radius")
def radius_command(
    ctx: typer.Context,
    scene: SceneArg,
    at: AtOpt,
    direction: Annotated[Optional[str], typer.Option("--dir", callback=coords_option, metavar="X,Y[,Z]",
                                                       help="normal direction")] = None,
    report: ReportOpt = None,
):
    """Directional, limiting, weak, reaching and liminf-of-weak radii at a point of X."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    rr = radius_report(s, at, tol, v=direction)

    rep = Report(command="radius", scene=s.name, parameters={"at": at, "dir": direction, "etas": list(DEFAULT_ETAS)})
    rep.results.update({
        "r_v": None if rr.r_v is None else radius_value(rr.r_v, tol),
        "r_tilde_v": None if rr.r_tilde_v is None else {
            "etas": list(rr.r_tilde_v.etas),
            "values": [radius_value(r, tol) for r in rr.r_tilde_v.values],
            "liminf": radius_value(rr.r_tilde_v.liminf, tol),
            "stabilized": rr.r_tilde_v.stabilized,
        },
        "r_weak": radius_value(rr.r_weak, tol),
        "r_reach": radius_value(rr.r_reach, tol),
        "r_bd": radius_value(rr.r_bd, tol),
        "diagnostics": rr.diagnostics,
    })
    same = (is_unbounded(rr.r_reach, tol) and is_unbounded(rr.r_bd, tol)) or abs(rr.r_reach - rr.r_bd) <= 5e-2
    rep.check("reaching_equals_bd", expected=radius_value(rr.r_reach, tol), actual=radius_value(rr.r_bd, tol),
              tolerance=5e-2, passed=same)
    emit_report(rep, report)


# ✅ === FRONTIER ===
@router.command("frontier")
@logged_command("frontier")
def frontier_command(ctx: typer.Context, scene: SceneArg, at: AtOpt, report: ReportOpt = None):
    """Whether a point off the medial axis lies in its closure."""
    tol = get_tolerances(ctx)
    s = get_scene(scene)
    fv = frontier_classify(s, at, tol)

    rep = Report(command="frontier", scene=s.name, parameters={"at": at})
    rep.results.update({
        "nearest": fv.nearest, "direction": fv.direction, "d_x": fv.d_x,
        "r_tilde": radius_value(fv.r_tilde, tol), "verdict": fv.verdict,
    })
    if fv.verdict == "in_closure":
        rep.check("distance_reaches_radius", expected=f">= {fv.r_tilde}", actual=fv.d_x,
                  tolerance=10 * tol.eps_dist, passed=fv.d_x >= fv.r_tilde - 10 * tol.eps_dist)
    emit_report(rep, report)
