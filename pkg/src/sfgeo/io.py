"""
JSON, CSV and OBJ serialisation.

All writers are deterministic: floats are written with their shortest
round-trip representation (``repr``) in JSON and with ``%.17g`` in CSV and
OBJ, in a fixed key and row order.
"""

import csv
import io as _io
import json

import numpy as np

from .ambient import SpaceForm
from .concircular import ConcircularField
from .curves import FrenetCurve, frenet_apparatus
from .errors import GeometryError
from .surfaces import ConcircularSurface, ProfileCurve, UmbilicalSurface

CSV_HEADER = (["s"] + [f"x{i}" for i in range(1, 5)] + [f"T{i}" for i in range(1, 5)]
              + [f"N{i}" for i in range(1, 5)] + [f"B{i}" for i in range(1, 5)] + ["kappa", "tau"])


class SchemaError(ValueError):
    """Input file does not follow the expected schema."""


def _lst(a):
    return np.asarray(a, dtype=float).tolist()


def _arr(obj, key, shape_tail=None):
    try:
        a = np.asarray(obj[key], dtype=float)
    except KeyError:
        raise SchemaError(f"missing field {key!r}") from None
    except (TypeError, ValueError):
        raise SchemaError(f"field {key!r} is not numeric") from None
    if shape_tail is not None and (a.ndim != 1 + len(shape_tail) or a.shape[1:] != shape_tail):
        raise SchemaError(f"field {key!r} has shape {a.shape}")
    return a


def dumps(obj):
    return json.dumps(obj, sort_keys=False, separators=(",", ":")) + "\n"


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON in {path}: {exc}") from None


def write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def curve_to_dict(curve, axis=None, lam=None):
    d = {"space_form": {"C": curve.sf.C},
         "grid": _lst(curve.s),
         "points": _lst(curve.gamma),
         "frames": {"T": _lst(curve.T), "N": _lst(curve.N), "B": _lst(curve.B)},
         "kappa": _lst(curve.kappa),
         "tau": _lst(curve.tau)}
    if axis is not None:
        d["axis"] = _lst(axis.p0)
    if lam is not None:
        d["lambda"] = float(lam)
    return d


def _space_form(d):
    try:
        return SpaceForm(float(d["space_form"]["C"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad space_form: {exc}") from None


def curve_from_dict(d):
    """``(curve, axis or None)``. Frames, curvature and torsion are optional;
    when absent they are recovered by the finite-difference apparatus."""
    if not isinstance(d, dict):
        raise SchemaError("curve JSON must be an object")
    sf = _space_form(d)
    s = _arr(d, "grid")
    pts = _arr(d, "points", (4,))
    if pts.shape[0] != s.size:
        raise SchemaError("grid and points differ in length")
    if "frames" in d and "kappa" in d and "tau" in d:
        fr = d["frames"]
        curve = FrenetCurve(sf, s, pts, _arr(fr, "T", (4,)), _arr(fr, "N", (4,)), _arr(fr, "B", (4,)),
                            _arr(d, "kappa"), _arr(d, "tau"))
    else:
        curve = frenet_apparatus(sf, s, pts)
    axis = ConcircularField(sf, _arr(d, "axis")) if "axis" in d else None
    return curve, axis


def write_curve_json(path, curve, axis=None, lam=None):
    write_text(path, dumps(curve_to_dict(curve, axis, lam)))


def read_curve_json(path):
    return curve_from_dict(read_json(path))


def curve_to_csv(curve):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    cols = np.column_stack([curve.s, curve.gamma, curve.T, curve.N, curve.B, curve.kappa, curve.tau])
    for row in cols:
        w.writerow(["%.17g" % v for v in row])
    return buf.getvalue()


def profile_to_dict(prof):
    return {"space_form": {"C": prof.sf.C},
            "grid": _lst(prof.t),
            "points": _lst(prof.delta),
            "frames": {"T": _lst(prof.T), "eta1": _lst(prof.eta1), "eta2": _lst(prof.eta2)},
            "kappa": _lst(prof.kappa)}


def surface_to_dict(S):
    Q = S.Q
    return {"kind": "concircular",
            "umbilical": {"p0_hat": _lst(Q.p0_hat), "d": Q.d, "k": Q.k, "c": Q.c},
            "angle_a": S.angle_a,
            "profile": profile_to_dict(S.profile),
            "z_range": list(S.z_range)}


def ruled_to_dict(curve, axis, z_range):
    return {"kind": "ruled_helix", "curve": curve_to_dict(curve, axis), "z_range": list(z_range)}


def surface_from_dict(d):
    """Rebuild a surface from JSON. Concircular surfaces come back as
    :class:`ConcircularSurface`; helix-generated ones as a ``(curve, axis,
    z_range)`` tuple for :func:`~sfgeo.surfaces.ruled_from_helix`."""
    if not isinstance(d, dict):
        raise SchemaError("surface JSON must be an object")
    kind = d.get("kind", "concircular")
    try:
        z_range = tuple(float(v) for v in d["z_range"])
    except (KeyError, TypeError, ValueError):
        raise SchemaError("bad or missing z_range") from None
    if kind == "ruled_helix":
        curve, axis = curve_from_dict(d.get("curve"))
        return curve, axis, z_range
    if kind != "concircular":
        raise SchemaError(f"unknown surface kind {kind!r}")
    try:
        p = d["profile"]
        u = d["umbilical"]
        angle = float(d["angle_a"])
    except (KeyError, TypeError, ValueError):
        raise SchemaError("surface JSON needs profile, umbilical and angle_a") from None
    sf = _space_form(p)
    try:
        Q = UmbilicalSurface(sf, _arr(u, "p0_hat"), float(u["d"]))
    except GeometryError as exc:
        raise SchemaError(f"bad umbilical surface: {exc}") from None
    fr = p.get("frames", {})
    prof = ProfileCurve(Q, _arr(p, "grid"), _arr(p, "points", (4,)), _arr(fr, "T", (4,)),
                        _arr(fr, "eta1", (4,)), _arr(fr, "eta2", (4,)), _arr(p, "kappa"))
    return ConcircularSurface(prof, angle, z_range)


def geodesic_to_dict(sol, surface_ref):
    return {"surface": surface_ref,
            "init": {"t": sol.init.t, "z": sol.init.z, "theta": sol.init.theta},
            "grid": _lst(sol.s),
            "states": np.column_stack([sol.t, sol.z, sol.theta]).tolist(),
            "points": _lst(sol.points),
            "kappa_pred": _lst(sol.kappa_pred),
            "tau_pred": _lst(sol.tau_pred)}


def stereographic(sf, pts):
    """``R x_{2..} / (R + x_1)``: Poincare ball for H^3, stereographic
    projection from ``-R e_1`` for S^3."""
    pts = np.asarray(pts, dtype=float)
    return sf.R * pts[..., 1:] / (sf.R + pts[..., :1])


def lattice_to_obj(sf, grid_points):
    """OBJ text for a ``(nu, nv, 4)`` lattice of points.

    Vertices are row-major (``u`` slow, ``v`` fast); every lattice quad
    ``(a, b, c, d)`` with ``a=(i,j), b=(i+1,j), c=(i+1,j+1), d=(i,j+1)``
    becomes the triangles ``(a, b, c)`` and ``(a, c, d)``.
    """
    P = stereographic(sf, grid_points)
    nu, nv = P.shape[:2]
    lines = ["# sfgeo lattice %d x %d" % (nu, nv)]
    for x, y, z in P.reshape(-1, 3):
        lines.append("v %.17g %.17g %.17g" % (x, y, z))

    def idx(i, j):
        return i * nv + j + 1

    for i in range(nu - 1):
        for j in range(nv - 1):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
    return "\n".join(lines) + "\n"


def patch_to_obj(patch, nu=33, nv=17):
    (u0, u1), (v0, v1) = patch.param_range
    U, V = np.meshgrid(np.linspace(u0, u1, nu), np.linspace(v0, v1, nv), indexing="ij")
    return lattice_to_obj(patch.sf, patch.point(U, V))
