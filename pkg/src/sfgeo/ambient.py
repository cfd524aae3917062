"""
Space forms as quadrics in pseudo-Euclidean space
=================================================

The sphere S^n(R) and the hyperbolic space H^n(R) are modelled as

    M^n(C) = {p in R^{n+1}_nu : <p, p> = 1/C},   C = eps / R^2,

with ``<u, v> = eps u_1 v_1 + u_2 v_2 + ... + u_{n+1} v_{n+1}`` and
``eps = (-1)^nu``. Points and vectors are plain numpy arrays whose last axis
holds the ambient coordinates, so every function here broadcasts over
leading batch axes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

POINT_TOL = 1e-10
RENORM_TOL = 1e-6


@dataclass(frozen=True)
class Signature:
    """Index ``nu`` and ambient dimension of R^{dim_ambient}_nu."""

    nu: int
    dim_ambient: int = 4

    def __post_init__(self):
        if self.nu not in (0, 1):
            raise GeometryError(f"only index 0 or 1 is supported, got {self.nu}")
        if self.dim_ambient < 3:
            raise GeometryError("ambient dimension must be at least 3")

    @property
    def epsilon(self) -> int:
        return 1 if self.nu == 0 else -1

    @property
    def metric(self) -> np.ndarray:
        g = np.ones(self.dim_ambient)
        g[0] = self.epsilon
        return g


@dataclass(frozen=True)
class SpaceForm:
    """The space form M^n(C) of nonzero curvature ``C``.

    ``R`` and the signature are derived: ``R = 1/sqrt|C|`` and ``nu`` is 0
    for the sphere, 1 for hyperbolic space. ``n`` is the manifold dimension
    (ambient dimension ``n + 1``).
    """

    C: float
    n: int = 3
    R: float = field(init=False)
    signature: Signature = field(init=False)

    def __post_init__(self):
        C = float(self.C)
        if not np.isfinite(C) or C == 0.0:
            raise GeometryError("curvature must be finite and nonzero (flat case unsupported)")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "R", 1.0 / np.sqrt(abs(C)))
        object.__setattr__(self, "signature", Signature(0 if C > 0 else 1, self.n + 1))

    @property
    def epsilon(self) -> int:
        return self.signature.epsilon

    @property
    def dim_ambient(self) -> int:
        return self.n + 1

    @property
    def metric(self) -> np.ndarray:
        return self.signature.metric

    def __repr__(self):
        return f"SpaceForm(C={self.C!r}, n={self.n})"


def _metric_of(sig):
    return sig.metric


def inner(u, v, sig):
    """Pseudo-Euclidean inner product ``eps u_1 v_1 + sum_{i>=2} u_i v_i``.

    ``sig`` may be a :class:`Signature` or a :class:`SpaceForm`.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = _metric_of(sig)
    if u.shape[-1] != g.size or v.shape[-1] != g.size:
        raise GeometryError(
            f"dimension mismatch: {u.shape[-1]} and {v.shape[-1]} vs ambient {g.size}")
    return np.sum(u * v * g, axis=-1)


def norm(u, sig):
    """``sqrt|<u, u>|``; the metric norm of a tangent (spacelike) vector."""
    return np.sqrt(np.abs(inner(u, u, sig)))


def fg(sf, x):
    """The trigonometric pair (f, g) of the space form.

    (cos, sin) for C > 0 and (cosh, sinh) for C < 0, so that
    ``f**2 + eps*g**2 == 1``, ``f' = -eps*g`` and ``g' = f``.
    """
    x = np.asarray(x, dtype=float)
    if sf.C > 0:
        return np.cos(x), np.sin(x)
    return np.cosh(x), np.sinh(x)


def on_manifold_defect(sf, p):
    return np.abs(inner(p, p, sf) - 1.0 / sf.C)


def as_point(sf, x, tol=POINT_TOL, renorm_tol=RENORM_TOL):
    """Validate ``x`` as a point of ``sf``, returning a float array.

    Points within ``renorm_tol`` of the quadric are rescaled onto it; points
    further away, or on the lower sheet of the hyperboloid, are rejected.
    """
    x = np.array(x, dtype=float)
    if x.shape[-1] != sf.dim_ambient:
        raise GeometryError(f"expected {sf.dim_ambient} coordinates, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise GeometryError("point has non-finite coordinates")
    if sf.C < 0 and np.any(x[..., 0] <= 0):
        raise GeometryError("hyperbolic points must lie on the upper sheet (x1 > 0)")
    defect = on_manifold_defect(sf, x)
    if np.all(defect <= tol):
        return x
    if np.any(defect > renorm_tol * max(1.0, 1.0 / abs(sf.C))):
        raise GeometryError(f"point is off the manifold by {float(np.max(defect)):.3e}")
    return renormalize(sf, x)


def renormalize(sf, x):
    """Radially rescale ``x`` onto the quadric ``<p, p> = 1/C``."""
    s = sf.C * inner(x, x, sf)
    return x / np.sqrt(s)[..., None]


def tangent_project(sf, p, u):
    """Tangential part ``u - C<u, p> p`` of an ambient vector at ``p``."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    return u - sf.C * inner(u, p, sf)[..., None] * p


def as_tangent(sf, p, w, tol=POINT_TOL, unit=False):
    w = np.array(w, dtype=float)
    if np.any(np.abs(inner(w, p, sf)) > tol * max(1.0, sf.R)):
        raise GeometryError("vector is not tangent at the base point")
    if unit and np.any(np.abs(inner(w, w, sf) - 1.0) > 1e-8):
        raise GeometryError("tangent vector is not unit")
    return w


def exp_map(sf, p, w, t, check=True):
    """Exponential map ``exp_p(t w) = f(t/R) p + R g(t/R) w`` for unit ``w``.

    ``t`` may be an array; the result then has shape ``t.shape + (n+1,)``
    when ``p`` and ``w`` are single vectors.
    """
    p = np.asarray(p, dtype=float)
    w = np.asarray(w, dtype=float)
    if check:
        p = as_point(sf, p)
        as_tangent(sf, p, w, tol=1e-8, unit=True)
    t = np.asarray(t, dtype=float)
    f, g = fg(sf, t / sf.R)
    # rescaling removes the roundoff of f^2 + eps g^2 = 1 far out on H^n
    return renormalize(sf, f[..., None] * p + sf.R * g[..., None] * w)


def basis(sf):
    return np.eye(sf.dim_ambient)


def gram_schmidt(sf, vectors, against=(), drop_tol=1e-9):
    """Metric Gram-Schmidt of ``vectors`` against the already-orthonormal
    ``against`` set; nearly dependent candidates are dropped.

    Candidates are assumed spacelike once orthogonalised (true for tangent
    vectors of either space form).
    """
    out = []
    done = [np.asarray(a, dtype=float) for a in against]
    for v in vectors:
        v = np.array(v, dtype=float)
        for e in done + out:
            ee = inner(e, e, sf)
            v = v - inner(v, e, sf) / ee * e
        nn = inner(v, v, sf)
        if abs(nn) < drop_tol:
            continue
        out.append(v / np.sqrt(abs(nn)))
    return out


def tangent_basis(sf, p, exclude=()):
    """Orthonormal basis of the tangent space at ``p`` (optionally of the
    orthogonal complement of the unit tangent vectors in ``exclude``)."""
    p = np.asarray(p, dtype=float)
    unit_p = p * np.sqrt(abs(sf.C))
    cands = sorted(basis(sf), key=lambda e: np.abs(inner(e, p, sf)))
    out = gram_schmidt(sf, cands, against=[unit_p, *exclude])
    need = sf.n - len(exclude)
    if len(out) < need:
        raise GeometryError("could not build a tangent basis")
    return out[:need]


def oriented_complement(sf, rows):
    """Unit vector orthogonal to the ``dim-1`` rows with ``det[rows, u] > 0``.

    Works on stacks: ``rows`` has shape ``(..., dim-1, dim)``.
    """
    rows = np.asarray(rows, dtype=float)
    dim = rows.shape[-1]
    low = rows * sf.metric
    u = np.empty(rows.shape[:-2] + (dim,))
    for j in range(dim):
        minor = np.delete(low, j, axis=-1)
        u[..., j] = (-1) ** j * np.linalg.det(minor)
    u = u / norm(u, sf)[..., None]
    full = np.concatenate([rows, u[..., None, :]], axis=-2)
    sign = np.sign(np.linalg.det(full))
    sign = np.where(sign == 0, 1.0, sign)
    return u * sign[..., None]


def random_point(sf, rng, scale=1.0):
    """Random point; on H^n the spatial part is Gaussian with std ``scale*R``."""
    if sf.C > 0:
        x = rng.normal(size=sf.dim_ambient)
        return sf.R * x / np.linalg.norm(x)
    v = rng.normal(scale=scale * sf.R, size=sf.n)
    x1 = np.sqrt(sf.R ** 2 + v @ v)
    return np.concatenate([[x1], v])


def random_unit_tangent(sf, p, rng):
    while True:
        w = tangent_project(sf, p, rng.normal(size=sf.dim_ambient))
        nw = norm(w, sf)
        if nw > 1e-3:
            return w / nw


def frame_determinant(rows):
    return np.linalg.det(np.asarray(rows, dtype=float))
