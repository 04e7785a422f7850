import numpy as np
import pytest

from phaseless_rtm.dataset import (
    ScatteringDataset,
    curves_from_obstacles,
    read_dataset,
    synthesize_dataset,
    write_dataset,
)
from phaseless_rtm.errors import DatasetFormatError
from phaseless_rtm.forward import Dirichlet, Impedance
from phaseless_rtm.geometry import ParametricCurve, SurveyGeometry

K = 4 * np.pi


@pytest.fixture(scope="module")
def small():
    sv = SurveyGeometry(6.0, 5, 7.0, 4)
    curves = [ParametricCurve.kite(center=(0.3, -0.2), rotation=0.5)]
    return synthesize_dataset(curves, Impedance(2.0), K, sv, keep_phase=True)


@pytest.mark.parametrize("keep", [True, False])
def test_round_trip_is_exact(tmp_path, small, keep):
    ds = small if keep else small.with_magnitude(small.magnitude)
    path = tmp_path / "d.txt"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back.provenance == "ingested"
    assert back.k == ds.k and back.survey == ds.survey
    assert back.bc == ds.bc and back.obstacles == ds.obstacles
    if keep:
        np.testing.assert_array_equal(back.total, ds.total)
    else:
        assert back.total is None
        np.testing.assert_array_equal(back.magnitude, ds.magnitude)
    # a second write of the ingested copy is byte-identical
    write_dataset(back, tmp_path / "again.txt")
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_record_layout(tmp_path, small):
    path = tmp_path / "d.txt"
    write_dataset(small, path)
    lines = path.read_text().splitlines()
    sep = lines.index("---")
    header = dict(line.split("=", 1) for line in lines[:sep])
    assert header["format_version"] == "1"
    assert header["has_phase"] == "1"
    assert header["N_s"] == "5" and header["N_r"] == "4"
    records = [line.split() for line in lines[sep + 1:]]
    assert len(records) == 20
    assert [r[:2] for r in records[:6]] == [["0", "0"], ["0", "1"], ["0", "2"], ["0", "3"], ["0", "4"], ["1", "0"]]
    z = small.total[1, 3]
    assert float(records[8][2]) == z.real and float(records[8][3]) == z.imag


def test_rejects_unknown_version(tmp_path, small):
    path = tmp_path / "d.txt"
    write_dataset(small, path)
    text = path.read_text().replace("format_version=1", "format_version=2")
    path.write_text(text)
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("---\n", ""),
        lambda t: t.rsplit("\n", 2)[0] + "\n",
        lambda t: t.replace("\n0 1 ", "\n1 0 ", 1),
        lambda t: t.replace("k=", "wavenumber="),
        lambda t: t.replace("N_s=5", "N_s=five"),
    ],
    ids=["no-separator", "truncated", "order", "missing-key", "bad-number"],
)
def test_rejects_malformed_files(tmp_path, small, mutate):
    path = tmp_path / "d.txt"
    write_dataset(small, path)
    path.write_text(mutate(path.read_text()))
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_magnitude_matches_total(small):
    np.testing.assert_allclose(small.magnitude, np.abs(small.total), rtol=1e-12)


def test_dataset_validation():
    sv = SurveyGeometry(6.0, 2, 6.0, 2)
    with pytest.raises(DatasetFormatError):
        ScatteringDataset(sv, K, np.ones((3, 2)))
    with pytest.raises(DatasetFormatError):
        ScatteringDataset(sv, K, np.array([[1.0, np.inf], [0.0, 1.0]]))


def test_obstacle_description_rebuilds_curves(small):
    curves = curves_from_obstacles(small.obstacles)
    assert curves == [ParametricCurve.kite(center=(0.3, -0.2), rotation=0.5)]


def test_empty_scene_in_file(tmp_path):
    sv = SurveyGeometry(6.0, 3, 6.0, 3)
    ds = synthesize_dataset([], Dirichlet(), 2.0, sv)
    write_dataset(ds, tmp_path / "e.txt")
    back = read_dataset(tmp_path / "e.txt")
    assert back.obstacles == []
    np.testing.assert_array_equal(back.magnitude, ds.magnitude)
