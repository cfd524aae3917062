import json

import numpy as np
import pytest

from sfgeo import io
from sfgeo.ambient import SpaceForm
from sfgeo.curves import HelixCase1Spec, synthesize_case1
from sfgeo.geodesics import GeodesicState, integrate_geodesic
from sfgeo.surfaces import ConcircularSurface, integrate_profile, make_umbilical


@pytest.fixture(scope="module")
def helix():
    return synthesize_case1(SpaceForm(-1.0), HelixCase1Spec(1.0, 1.0, 1.0, 0.2), (0.0, 0.5))


@pytest.fixture(scope="module")
def surface():
    Q = make_umbilical(SpaceForm(1.0), [0, 0, 0, 1.0], 0.3)
    prof = integrate_profile(Q, lambda t: 0.2 + 0.1 * np.cos(t), t_range=(0.0, 1.0))
    return ConcircularSurface(prof, 0.4, (-0.3, 0.3))


def test_curve_roundtrip(tmp_path, helix):
    path = tmp_path / "c.json"
    io.write_curve_json(path, helix.curve, helix.axis, helix.lam)
    curve, axis = io.read_curve_json(path)
    np.testing.assert_array_equal(curve.gamma, helix.curve.gamma)
    np.testing.assert_array_equal(curve.tau, helix.curve.tau)
    np.testing.assert_array_equal(axis.p0, helix.axis.p0)
    assert json.loads(path.read_text())["lambda"] == helix.lam


def test_curve_without_frames_uses_apparatus(helix):
    d = io.curve_to_dict(helix.curve)
    for key in ("frames", "kappa", "tau"):
        del d[key]
    curve, axis = io.curve_from_dict(d)
    assert axis is None
    np.testing.assert_allclose(curve.kappa, helix.curve.kappa, atol=1e-5)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("points"),
    lambda d: d.update(points=[[1, 2, 3]]),
    lambda d: d.update(grid="abc"),
    lambda d: d.pop("space_form"),
])
def test_schema_errors(helix, mutate):
    d = io.curve_to_dict(helix.curve)
    mutate(d)
    with pytest.raises(io.SchemaError):
        io.curve_from_dict(d)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(io.SchemaError):
        io.read_json(path)


def test_csv_layout(helix):
    text = io.curve_to_csv(helix.curve)
    lines = text.splitlines()
    assert lines[0].split(",") == io.CSV_HEADER
    assert len(lines) == helix.curve.s.size + 1
    row = np.array(lines[1].split(","), dtype=float)
    np.testing.assert_array_equal(row[1:5], helix.curve.gamma[0])


def test_surface_roundtrip(surface):
    back = io.surface_from_dict(json.loads(io.dumps(io.surface_to_dict(surface))))
    assert back.angle_a == surface.angle_a
    np.testing.assert_array_equal(back.point(0.37, 0.1), surface.point(0.37, 0.1))


def test_ruled_roundtrip(helix):
    d = json.loads(io.dumps(io.ruled_to_dict(helix.curve, helix.axis, (-0.2, 0.2))))
    curve, axis, z_range = io.surface_from_dict(d)
    assert z_range == (-0.2, 0.2)
    np.testing.assert_array_equal(curve.gamma, helix.curve.gamma)


def test_unknown_surface_kind():
    with pytest.raises(io.SchemaError, match="kind"):
        io.surface_from_dict({"kind": "torus", "z_range": [0, 1]})


def test_geodesic_dict(surface):
    sol = integrate_geodesic(surface, GeodesicState(0.3, 0.0, 0.5), (0.0, 0.2))
    d = io.geodesic_to_dict(sol, "s.json")
    assert len(d["states"]) == len(d["grid"]) == len(d["points"])
    assert d["init"] == {"t": 0.3, "z": 0.0, "theta": 0.5}


@pytest.mark.parametrize("C", [1.0, -1.0])
def test_stereographic_is_finite_and_bounded(C):
    sf = SpaceForm(C)
    pts = np.array([[sf.R, 0, 0, 0], [np.cosh(1.0) if C < 0 else 0.0, np.sinh(1.0) if C < 0 else 1.0, 0, 0]])
    P = io.stereographic(sf, pts)
    np.testing.assert_allclose(P[0], 0.0)
    if C < 0:
        assert np.all(np.linalg.norm(P, axis=-1) < sf.R)


def test_obj_ordering():
    sf = SpaceForm(1.0)
    grid = np.zeros((3, 2, 4))
    grid[..., 0] = 1.0
    text = io.lattice_to_obj(sf, grid)
    faces = [l for l in text.splitlines() if l.startswith("f ")]
    verts = [l for l in text.splitlines() if l.startswith("v ")]
    assert len(verts) == 6
    # (i, j) -> i * nv + j + 1
    assert faces[:2] == ["f 1 3 4", "f 1 4 2"]
    assert len(faces) == 2 * 2 * 1


def test_obj_is_deterministic(surface):
    assert io.patch_to_obj(surface, 9, 5) == io.patch_to_obj(surface, 9, 5)
