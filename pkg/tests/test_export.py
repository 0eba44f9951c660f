import csv

import numpy as np

from medialkit.schemas.region import make_region
from medialkit.services.cone import SphericalCloud
from medialkit.services.dimension import DimensionEstimate
from medialkit.services.helpers.export import CSVExport
from medialkit.services.medial import MedialCloud, MedialSample


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


def test_medial_cloud_csv(tmp_path):
    sample = MedialSample(point=np.array([0.0, 0.1]), distance=1.005, multiplicity=2, diameter=2.0, refined=True)
    cloud = MedialCloud(scene="two_points", region=make_region([-1, -1, 1, 1], 0.1), step=0.1, samples=(sample,))
    path = tmp_path / "m.csv"
    assert CSVExport.medial_cloud(cloud, path) == 1

    header, row = _rows(path)
    assert header == ["x", "y", "distance", "multiplicity", "diameter", "refined", "continuum"]
    assert row == ["0.0", "0.1", "1.005", "2", "2.0", "1", "0"]


def test_direction_csv_in_3d(tmp_path):
    cloud = SphericalCloud(anchor=np.zeros(3), directions=np.array([[0.0, 0.0, 1.0]]), scale_tags=[[0.4, 0.2]])
    path = tmp_path / "d.csv"
    CSVExport.directions(cloud, path)
    assert _rows(path) == [["ux", "uy", "uz", "scales"], ["0.0", "0.0", "1.0", "0.4;0.2"]]


def test_spectra_csv(tmp_path):
    est = DimensionEstimate(anchor=np.zeros(2), scales=[0.2, 0.1], spectra=[[1.0, 0.0], [0.5, 0.0]], dim=1)
    path = tmp_path / "s.csv"
    assert CSVExport.spectra(est, path) == 2
    rows = _rows(path)
    assert rows[0] == ["scale", "rank", "eigenvalue"]
    assert len(rows) == 5
