import csv
from pathlib import Path

from medialkit.services.cone import SphericalCloud
from medialkit.services.dimension import DimensionEstimate
from medialkit.services.medial import MedialCloud


AXES = ("x", "y", "z")


class CSVExport:
    """
    Point-cloud CSV writers for external plotting.

    Rules:
    - one header row, one row per sample, fixed column order
    - coordinates first, repr floats (byte-identical across runs)
    """

    # 1️⃣ Medial samples
    @staticmethod
    def medial_cloud(cloud: MedialCloud, path: str | Path) -> int:
        axes = AXES[: cloud.region.dim]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow([*axes, "distance", "multiplicity", "diameter", "refined", "continuum"])
            for m in cloud.samples:
                writer.writerow([
                    *(repr(float(c)) for c in m.point),
                    repr(float(m.distance)), m.multiplicity, repr(float(m.diameter)),
                    int(m.refined), int(m.continuum),
                ])
        return len(cloud.samples)

    # 2️⃣ Unit directions (tangent cones, sphere medial axes)
    @staticmethod
    def directions(cloud: SphericalCloud, path: str | Path) -> int:
        dim = cloud.anchor.size
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow([f"u{a}" for a in AXES[:dim]] + ["scales"])
            for i, u in enumerate(cloud.directions):
                tags = cloud.scale_tags[i] if i < len(cloud.scale_tags) else []
                writer.writerow([*(repr(float(c)) for c in u), ";".join(repr(float(r)) for r in tags)])
        return len(cloud.directions)

    # 3️⃣ PCA spectra per scale
    @staticmethod
    def spectra(est: DimensionEstimate, path: str | Path) -> int:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["scale", "rank", "eigenvalue"])
            for r, eig in zip(est.scales, est.spectra):
                for k, lam in enumerate(eig):
                    writer.writerow([repr(float(r)), k, repr(float(lam))])
        return len(est.scales)
