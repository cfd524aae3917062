"""
Concircular surfaces in M^3(C)
==============================

A nontrivial concircular surface is ruled by geodesics leaving a curve
``delta`` of a totally umbilical surface ``Q = M ∩ {<p, p0_hat> = d}`` at a
constant angle ``a`` with ``Q``::

    Psi_a(t, z) = f(z/R) delta(t) + R g(z/R) (cos(a) eta1(t) + sin(a) eta2(t)),

where ``eta1`` is the normal of ``delta`` inside ``Q`` and ``eta2`` the
normal of ``Q`` in ``M``. Its unit normal ``-sin(a) eta1 + cos(a) eta2``
makes the constant product ``A cos(a)`` with ``p0_hat``.

Orientation conventions
-----------------------
* ``eta2`` is oriented so that ``A = <p0_hat, eta2> > 0``. The shape
  operator of ``Q`` is then ``m * Id`` with the *signed* constant
  ``m = C d / A``; ``k = |m|``.
* Profile frames ``(delta, T, eta1, eta2)`` are positively oriented.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .ambient import (as_point, exp_map, fg, gram_schmidt, inner, norm,
                      oriented_complement, renormalize, tangent_basis,
                      tangent_project)
from .concircular import ConcircularField, covariant_derivative
from .curves import reorthonormalize, certify_helix
from .errors import CertificationError, DomainError, GeometryError
from .numerics import DEFAULT_STEP, OdeProblem, integrate

EDGE_TOL = 1e-9


class UmbilicalSurface:
    """Totally umbilical surface ``Q = {p in M : <p, p0_hat> = d}``.

    Only spacelike ``p0_hat`` are accepted, which keeps ``Q`` Riemannian in
    either space form. Derived constants: ``A``, ``B`` with
    ``p0_hat = A eta2 + B p``, the signed shape constant ``m``, ``k = |m|``
    and the intrinsic curvature ``c = C + k**2``.
    """

    def __init__(self, sf, p0_hat, d):
        p0_hat = np.array(p0_hat, dtype=float)
        if p0_hat.shape != (sf.dim_ambient,):
            raise GeometryError("p0_hat has the wrong dimension")
        nn = inner(p0_hat, p0_hat, sf)
        if nn <= 1e-12:
            raise GeometryError("p0_hat must be spacelike (timelike/lightlike p0_hat rejected)")
        self.sf = sf
        self.p0_hat = p0_hat / np.sqrt(nn)
        self.d = float(d)
        AA = 1.0 - sf.C * self.d ** 2
        if AA <= 1e-12:
            raise GeometryError(
                f"Q is empty or degenerate: need d^2 < R^2 (d={self.d}, R={sf.R})")
        self.A = np.sqrt(AA)
        self.B = sf.C * self.d
        self.m = sf.C * self.d / self.A
        self.k = abs(self.m)
        self.c = sf.C + self.k ** 2
        self._basis = self._orthogonal_basis()

    def __repr__(self):
        return f"UmbilicalSurface(C={self.sf.C}, p0_hat={self.p0_hat.tolist()}, d={self.d})"

    @property
    def axis(self):
        return ConcircularField(self.sf, self.p0_hat)

    def level(self, p):
        return inner(p, self.p0_hat, self.sf)

    def eta2(self, p):
        """Unit normal of ``Q`` inside ``M`` (valid on ``Q``)."""
        return (self.p0_hat - self.sf.C * self.d * np.asarray(p)) / self.A

    def normal_field(self, p):
        """Extension of ``eta2`` off ``Q``: normalised tangential part of ``p0_hat``."""
        v = tangent_project(self.sf, p, self.p0_hat)
        return v / norm(v, self.sf)[..., None]

    def _orthogonal_basis(self):
        sf = self.sf
        E = list(np.eye(sf.dim_ambient))
        if sf.C < 0:
            out = gram_schmidt(sf, E, against=[self.p0_hat])
            # future-pointing timelike vector first
            out.sort(key=lambda v: inner(v, v, sf))
            if out[0][0] < 0:
                out[0] = -out[0]
        else:
            E.sort(key=lambda e: abs(inner(e, self.p0_hat, sf)))
            out = gram_schmidt(sf, E, against=[self.p0_hat])
        return out[:3]

    def point(self, r, phi):
        """Point of ``Q`` in geodesic polar-like coordinates about a base point."""
        u0, u1, u2 = self._basis
        sf = self.sf
        r = np.asarray(r, dtype=float)[..., None]
        phi = np.asarray(phi, dtype=float)[..., None]
        if sf.C > 0:
            beta = np.sqrt(sf.R ** 2 - self.d ** 2)
            q = np.cos(r) * u0 + np.sin(r) * (np.cos(phi) * u1 + np.sin(phi) * u2)
        else:
            beta = np.sqrt(sf.R ** 2 + self.d ** 2)
            q = np.cosh(r) * u0 + np.sinh(r) * (np.cos(phi) * u1 + np.sin(phi) * u2)
        return self.d * self.p0_hat + beta * q

    def sample_points(self, n, rng=None, spread=1.0):
        rng = np.random.default_rng(0) if rng is None else rng
        r = rng.uniform(0, spread, size=n)
        phi = rng.uniform(0, 2 * np.pi, size=n)
        return self.point(r, phi)

    def adapted_frame(self, r=0.0, phi=0.0, turn=0.0):
        """Positively oriented ``(delta, T, eta1, eta2)`` at ``point(r, phi)``;
        ``turn`` rotates ``T`` inside the tangent plane of ``Q``."""
        sf = self.sf
        p = self.point(r, phi)
        e2 = self.eta2(p)
        t1, t2 = tangent_basis(sf, p, exclude=[e2])
        T = np.cos(turn) * t1 + np.sin(turn) * t2
        eta1 = -np.sin(turn) * t1 + np.cos(turn) * t2
        if np.linalg.det(np.array([p, T, eta1, e2])) < 0:
            eta1 = -eta1
        return np.array([p, T, eta1, e2])


def make_umbilical(sf, p0_hat, d, certify=True, h=1e-4):
    """Construct ``Q`` and certify its constants numerically.

    The shape operator measured by :func:`umbilical_invariants` must be
    umbilic with ``k`` matching ``|C d| / sqrt(1 - C d^2)`` to 1e-6.
    """
    Q = UmbilicalSurface(sf, p0_hat, d)
    if certify:
        k, c, defect = umbilical_invariants(Q, Q.sample_points(8), h=h)
        if defect > 1e-6 or abs(k - Q.k) > 1e-6:
            raise CertificationError(
                f"umbilical certificate failed (defect {defect:.2e}, k {k} vs {Q.k})",
                stage="umbilical")
    return Q


def shape_operator(surface, p, h=1e-4):
    """2x2 matrix of ``A X = -nabla_X eta`` in an orthonormal tangent basis of
    the level surface through ``p``."""
    sf = surface.sf
    eta = surface.normal_field(p)
    basis = tangent_basis(sf, p, exclude=[eta])
    A = np.empty((2, 2))
    for i, e in enumerate(basis):
        D = covariant_derivative(sf, surface.normal_field, p, e, h)
        for j, ej in enumerate(basis):
            A[i, j] = -inner(D, ej, sf)
    return A


def umbilical_invariants(surface, sample_pts, h=1e-4):
    """Estimate ``(k, c, umbilicity_defect)`` from the shape operator.

    ``k`` is the mean of ``|tr(A)/2|`` over the samples, the defect the max
    entry of ``A - (tr(A)/2) Id``, and ``c = C + k**2`` (Gauss equation with a
    spacelike normal).
    """
    ks, defect = [], 0.0
    for p in np.atleast_2d(sample_pts):
        A = shape_operator(surface, p, h)
        m = np.trace(A) / 2
        ks.append(abs(m))
        defect = max(defect, float(np.max(np.abs(A - m * np.eye(2)))))
    k = float(np.mean(ks))
    return k, surface.sf.C + k ** 2, defect


class BumpedSurface:
    """Level set of ``<x, p0_hat> + amp * exp(-|x - center|^2 / width^2)``.

    A smooth non-umbilical perturbation of ``Q``; the negative control for the
    umbilical tests.
    """

    def __init__(self, Q, amp=0.2, center=None, width=0.5):
        self.Q = Q
        self.sf = Q.sf
        self.amp, self.width = amp, width
        self.center = Q.point(0.0, 0.0) if center is None else np.asarray(center, dtype=float)
        self.d = Q.d

    def F(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum((x - self.center) ** 2, axis=-1)
        return self.Q.level(x) + self.amp * np.exp(-r2 / self.width ** 2)

    def gradient(self, x):
        """Metric gradient of ``F`` in the ambient space."""
        x = np.asarray(x, dtype=float)
        r2 = np.sum((x - self.center) ** 2, axis=-1)
        bump = self.amp * np.exp(-r2 / self.width ** 2)
        dF = self.Q.p0_hat * self.sf.metric - (2 * bump / self.width ** 2)[..., None] * (x - self.center)
        return dF * self.sf.metric

    def normal_field(self, p):
        v = tangent_project(self.sf, p, self.gradient(p))
        return v / norm(v, self.sf)[..., None]

    def project(self, p, iters=30):
        """Newton projection of a point of M onto the level set ``F = d``."""
        sf = self.sf
        for _ in range(iters):
            g = tangent_project(sf, p, self.gradient(p))
            r = self.F(p) - self.d
            p = renormalize(sf, p - r / inner(g, g, sf) * g)
            if abs(r) < 1e-15:
                break
        return p

    def sample_points(self, n, rng=None, spread=0.4):
        return np.array([self.project(p) for p in self.Q.sample_points(n, rng, spread)])


def fit_normal_axis(surface, sample_pts):
    """Find the ``p0`` whose concircular field is normal to the surface.

    Solves ``<p0, e> = 0`` for all tangent vectors ``e`` of the surface at
    the samples. Returns ``(p0, residual)`` with ``|p0| = 1``; a residual near
    zero means some concircular field is parallel to the normal.
    """
    sf = surface.sf
    rows = []
    for p in np.atleast_2d(sample_pts):
        eta = surface.normal_field(p)
        for e in tangent_basis(sf, p, exclude=[eta]):
            rows.append(e * sf.metric)
    rows = np.array(rows)
    _, sv, Vt = np.linalg.svd(rows, full_matrices=False)
    p0 = Vt[-1]
    return p0, float(np.max(np.abs(rows @ p0)))


class ProfileCurve:
    """Arclength-sampled curve ``delta`` in ``Q`` with its adapted frame.

    Off-grid values come from cubic splines of the samples; ``delta`` is
    projected back onto ``M``.
    """

    def __init__(self, Q, t, delta, T, eta1, eta2, kappa):
        self.Q = Q
        self.sf = Q.sf
        self.t = np.asarray(t, dtype=float)
        self.delta = np.asarray(delta, dtype=float)
        self.T = np.asarray(T, dtype=float)
        self.eta1 = np.asarray(eta1, dtype=float)
        self.eta2 = np.asarray(eta2, dtype=float)
        self.kappa = np.asarray(kappa, dtype=float)
        frames = np.concatenate([self.delta, self.T, self.eta1, self.eta2], axis=1)
        self._frames = CubicSpline(self.t, frames, axis=0)
        self._kappa = CubicSpline(self.t, self.kappa)
        self._dkappa = self._kappa.derivative()

    @property
    def t_range(self):
        return self.t[0], self.t[-1]

    def contains(self, t):
        t = np.asarray(t)
        return np.all((t >= self.t[0] - EDGE_TOL) & (t <= self.t[-1] + EDGE_TOL))

    def at(self, t):
        """``(delta, T, eta1, eta2, kappa, kappa')`` at parameter(s) ``t``."""
        if not self.contains(t):
            raise DomainError(f"profile parameter outside {self.t_range}")
        F = self._frames(t)
        delta = renormalize(self.sf, F[..., 0:4])
        return (delta, F[..., 4:8], F[..., 8:12], F[..., 12:16],
                self._kappa(t), self._dkappa(t))

    def drift(self):
        """Max ``|<delta, p0_hat> - d|`` over the samples."""
        return float(np.max(np.abs(self.Q.level(self.delta) - self.Q.d)))

    def frame_defect(self):
        from .curves import frame_defect
        F = np.stack([self.delta, self.T, self.eta1, self.eta2], axis=1)
        return float(np.max(frame_defect(self.sf, F)))


def integrate_profile(Q, kappa_delta, init=None, t_range=(0.0, 1.0), step=DEFAULT_STEP):
    """Integrate a curve of ``Q`` with geodesic curvature ``kappa_delta(t)``.

    ``delta' = T``, ``T' = -C delta + kappa_delta eta1 + m eta2``,
    ``eta1' = -kappa_delta T``, ``eta2' = -m T`` with per-step
    re-orthonormalisation. Raises if ``delta`` drifts off ``Q`` by more
    than 1e-6.
    """
    sf = Q.sf
    F0 = Q.adapted_frame() if init is None else np.array(init, dtype=float)
    if abs(Q.level(F0[0]) - Q.d) > 1e-8:
        raise GeometryError("initial point is not on Q")
    if np.max(np.abs(F0[3] - Q.eta2(F0[0]))) > 1e-8:
        raise GeometryError("initial eta2 must be the oriented normal of Q")
    if np.max(np.abs(inner(F0[1:3], Q.p0_hat, sf))) > 1e-8:
        raise GeometryError("initial T, eta1 must be tangent to Q")
    if np.linalg.det(F0) <= 0:
        raise GeometryError("initial profile frame must be positively oriented")
    C, m = sf.C, Q.m

    def rhs(t, y):
        d, T, e1, e2 = y
        k = kappa_delta(t)
        return np.array([T, -C * d + k * e1 + m * e2, -k * T, -m * T])

    traj = integrate(OdeProblem(rhs, F0, t_range[0], t_range[1], step,
                                post_step=lambda t, y: reorthonormalize(sf, y)))
    Y = traj.y
    kap = np.array([kappa_delta(t) for t in traj.s], dtype=float)
    prof = ProfileCurve(Q, traj.s, Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], kap)
    drift = prof.drift()
    if drift > 1e-6:
        raise CertificationError(f"profile drifted off Q by {drift:.2e}", stage="profile", value=drift)
    return prof


class ConcircularSurface:
    """The ruled patch ``Psi_a`` over a profile curve of ``Q``.

    Parameters are ``(t, z)``: ``t`` the profile arclength, ``z`` the
    arclength along the rulings. All evaluation methods broadcast.
    """

    def __init__(self, profile, angle_a, z_range=(-0.5, 0.5)):
        self.profile = profile
        self.Q = profile.Q
        self.sf = profile.sf
        self.angle_a = float(angle_a)
        self.z_range = (float(z_range[0]), float(z_range[1]))

    @property
    def axis(self):
        return self.Q.axis

    @property
    def lam_expected(self):
        return self.Q.A * np.cos(self.angle_a)

    @property
    def param_range(self):
        return self.profile.t_range, self.z_range

    def check_domain(self, t, z):
        z = np.asarray(z)
        if not self.profile.contains(t) or np.any(z < self.z_range[0] - EDGE_TOL) \
                or np.any(z > self.z_range[1] + EDGE_TOL):
            raise DomainError(f"(t, z) outside {self.profile.t_range} x {self.z_range}")

    def _parts(self, t, z):
        sf = self.sf
        delta, T, e1, e2, kap, dkap = self.profile.at(t)
        f, g = fg(sf, np.asarray(z, dtype=float) / sf.R)
        ca, sa = np.cos(self.angle_a), np.sin(self.angle_a)
        W = ca * e1 + sa * e2
        K = ca * kap + sa * self.Q.m
        return delta, T, e1, e2, kap, dkap, f, g, W, K

    def ruling_speed(self, t, z):
        """``G = f - R g (cos(a) kappa_delta + sin(a) m)`` with ``X_t = G T_delta``."""
        _, _, _, _, _, _, f, g, _, K = self._parts(t, z)
        return f - self.sf.R * g * K

    def point(self, t, z, check=True):
        if check:
            self.check_domain(t, z)
        delta, _, _, _, _, _, f, g, W, _ = self._parts(t, z)
        return f[..., None] * delta + self.sf.R * g[..., None] * W

    def partials(self, t, z):
        """``(X, X_t, X_z)``; ``X_t`` in closed form ``G T_delta``."""
        self.check_domain(t, z)
        sf = self.sf
        delta, T, _, _, _, _, f, g, W, K = self._parts(t, z)
        X = f[..., None] * delta + sf.R * g[..., None] * W
        G = f - sf.R * g * K
        Xt = G[..., None] * T
        Xz = (-sf.epsilon / sf.R * g)[..., None] * delta + f[..., None] * W
        return X, Xt, Xz

    def second_partials(self, t, z):
        self.check_domain(t, z)
        sf = self.sf
        delta, T, e1, e2, kap, dkap, f, g, W, K = self._parts(t, z)
        ca = np.cos(self.angle_a)
        X = f[..., None] * delta + sf.R * g[..., None] * W
        G = f - sf.R * g * K
        Gt = -sf.R * g * ca * dkap
        Gz = -sf.epsilon / sf.R * g - f * K
        dT = -sf.C * delta + kap[..., None] * e1 + self.Q.m * e2
        Xtt = Gt[..., None] * T + G[..., None] * dT
        Xtz = Gz[..., None] * T
        Xzz = -sf.C * X
        return Xtt, Xtz, Xzz

    def normal(self, t, z):
        """``-sin(a) eta1 + cos(a) eta2``, constant along each ruling."""
        self.check_domain(t, z)
        _, _, e1, e2, _, _, _, _, _, _ = self._parts(t, z)
        z = np.asarray(z, dtype=float)
        N = -np.sin(self.angle_a) * e1 + np.cos(self.angle_a) * e2
        return np.broadcast_to(N, z.shape + (4,)) if z.ndim > N.ndim - 1 else N

    def tangent_frame(self, t, z):
        """Orthonormal tangent basis ``(T_delta, X_z)``."""
        _, _, Xz = self.partials(t, z)
        _, T, _, _, _, _ = self.profile.at(t)
        return T, Xz


def eval_patch(S, t, z, tol=1e-6):
    """``(point, X_t, X_z, N)`` with ``N`` certified unit and orthogonal to
    both partials."""
    X, Xt, Xz = S.partials(t, z)
    N = S.normal(t, z)
    sf = S.sf
    err = max(float(np.max(np.abs(inner(N, N, sf) - 1))),
              float(np.max(np.abs(inner(N, Xt, sf)))),
              float(np.max(np.abs(inner(N, Xz, sf)))),
              float(np.max(np.abs(inner(N, X, sf)))))
    if err > tol:
        raise CertificationError(f"patch normal fails orthogonality ({err:.2e})", stage="normal")
    return X, Xt, Xz, N


def fd_partials(patch, u, v, h=1e-5):
    """Central-difference partials of ``patch.point`` (independent of any
    closed-form derivative)."""
    Xu = (patch.point(u + h, v) - patch.point(u - h, v)) / (2 * h)
    Xv = (patch.point(u, v + h) - patch.point(u, v - h)) / (2 * h)
    return Xu, Xv


def numeric_normal(patch, u, v, h=1e-5):
    """Unit normal from finite-difference partials, oriented by
    ``det[X, X_u, X_v, N] > 0``."""
    X = patch.point(u, v)
    Xu, Xv = fd_partials(patch, u, v, h)
    return oriented_complement(patch.sf, np.stack([X, Xu, Xv], axis=-2))


def lattice(patch, nu=17, nv=17, margin=1e-4):
    (u0, u1), (v0, v1) = patch.param_range
    u = np.linspace(u0 + margin, u1 - margin, nu)
    v = np.linspace(v0 + margin, v1 - margin, nv)
    return np.meshgrid(u, v, indexing="ij")


@dataclass
class SurfaceConcircularity:
    lam_mean: float
    deviation: float
    A: float
    angle: float
    formula_gap: float


def surface_concircularity_defect(S, nt=17, nz=17, h=1e-5):
    """Sample ``<N, p0_hat>`` over a lattice with finite-difference normals.

    Also recovers the angle ``a`` from ``<N, p0_hat> = A cos(a)`` and
    ``<N, eta1> = -sin(a)``; ``formula_gap`` is ``|lam_mean - A cos(a)|``.
    """
    T, Z = lattice(S, nt, nz, margin=2 * h)
    N = numeric_normal(S, T, Z, h)
    lam = inner(N, S.Q.p0_hat, S.sf)
    mean = float(np.mean(lam))
    _, _, e1, _, _, _ = S.profile.at(T)
    sin_a = -float(np.mean(inner(N, e1, S.sf)))
    angle = float(np.arctan2(sin_a, mean / S.Q.A))
    return SurfaceConcircularity(mean, float(np.max(np.abs(lam - mean))), S.Q.A, angle,
                                 abs(mean - S.lam_expected))


def ruling_check(S, nt=9, nz=9, h=1e-3):
    """Rulings are the integral curves of the tangential part of the axis and
    are geodesics of M contained in S.

    Returns a dict of sup-norms: ``axis_across_rulings`` (component of the
    axis along ``T_delta``), ``shape_on_ruling`` (tangential part of
    ``dN/dz``, i.e. ``A X_z``) and ``ruling_acceleration``
    (``|X_zz + C X|`` from second differences).
    """
    sf = S.sf
    T, Z = lattice(S, nt, nz, margin=2 * h)
    X, _, Xz = S.partials(T, Z)
    _, Td, _, _, _, _ = S.profile.at(T)
    V = S.axis.vector(X)
    across = np.abs(inner(V, Td, sf))
    Np = numeric_normal(S, T, Z + h)
    Nm = numeric_normal(S, T, Z - h)
    dN = (Np - Nm) / (2 * h)
    shape = np.hypot(inner(dN, Td, sf), inner(dN, Xz, sf))
    acc = (S.point(T, Z + h) - 2 * X + S.point(T, Z - h)) / h ** 2 + sf.C * X
    return {"axis_across_rulings": float(np.max(across)),
            "shape_on_ruling": float(np.max(shape)),
            "ruling_acceleration": float(np.max(np.linalg.norm(acc, axis=-1)))}


def vertex_parameter(S):
    """Ruling parameter ``z0`` where all rulings of a cone meet, or ``None``.

    Solves ``f(z0/R) = R g(z0/R) sin(a) m``; on the sphere the root of
    smallest ``|z0|`` is returned. In hyperbolic space a root exists only
    when ``|m| R > 1``.
    """
    if abs(np.cos(S.angle_a)) > 1e-8:
        raise GeometryError("vertex only defined for cos(a) = 0 (lambda = 0 surfaces)")
    sf = S.sf
    q = np.sin(S.angle_a) * S.Q.m * sf.R
    if sf.C > 0:
        x = np.arctan2(1.0, abs(q))
        return sf.R * (x if q >= 0 else -x)
    if abs(q) <= 1.0:
        return None
    return sf.R * np.arctanh(1.0 / q)


def vertex_of(S, tol=1e-6):
    """Common point of all rulings of a ``lambda = 0`` surface, or ``None``.

    The candidate ``Psi_a(t, z0)`` is evaluated over the whole profile grid
    and must be constant to ``tol``.
    """
    z0 = vertex_parameter(S)
    if z0 is None:
        return None
    pts = S.point(S.profile.t, np.full(S.profile.t.shape, z0), check=False)
    spread = float(np.max(np.linalg.norm(pts - pts[0], axis=-1)))
    if spread > tol:
        raise CertificationError(f"rulings do not meet (spread {spread:.2e})", stage="vertex",
                                 value=spread)
    return as_point(S.sf, pts.mean(axis=0))


@dataclass
class ConicalSurface:
    """Geodesic cone over a closed or open curve of unit directions at the
    vertex, sampled on a uniform ``u`` grid."""

    sf: object
    vertex: np.ndarray
    u: np.ndarray
    dirs: np.ndarray
    t_range: Tuple[float, float] = (0.05, 1.0)

    def __post_init__(self):
        self.vertex = as_point(self.sf, self.vertex)
        self.dirs = np.atleast_2d(np.asarray(self.dirs, dtype=float))
        if np.max(np.abs(inner(self.dirs, self.vertex, self.sf))) > 1e-10:
            raise GeometryError("cone directions must be tangent at the vertex")
        if np.max(np.abs(inner(self.dirs, self.dirs, self.sf) - 1)) > 1e-10:
            raise GeometryError("cone directions must be unit")


def circle_directions(sf, vertex, opening=0.6, n=64, wobble=0.0):
    """Unit directions ``cos(b) e1 + sin(b)(cos(u) e2 + sin(u) e3)`` at the
    vertex, with the opening angle ``b`` optionally modulated by
    ``wobble*sin(2u)``."""
    e1, e2, e3 = tangent_basis(sf, vertex)
    u = np.linspace(0, 2 * np.pi, n, endpoint=False)
    b = (opening + wobble * np.sin(2 * u))[:, None]
    dirs = np.cos(b) * e1 + np.sin(b) * (np.cos(u)[:, None] * e2 + np.sin(u)[:, None] * e3)
    return u, dirs


def conical_patch(sf, vertex, dirs, t):
    """``exp_vertex(t v)`` for every direction ``v``; shape ``(len(dirs), len(t), n+1)``."""
    vertex = np.asarray(vertex, dtype=float)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if np.max(np.abs(inner(dirs, vertex, sf))) > 1e-10:
        raise GeometryError("cone directions must be tangent at the vertex")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.stack([exp_map(sf, vertex, v, t) for v in dirs])


def conical_normals(cone, t):
    """Normals along each ruling from the cone's partial derivatives.

    Returns ``(normals, eta)`` where ``eta`` is the normal of the direction
    curve inside the tangent space at the vertex; the cone normal along
    ruling ``v`` should equal ``eta(v)`` for every ``t``.
    """
    from .numerics import fd_derivative
    sf = cone.sf
    t = np.atleast_1d(np.asarray(t, dtype=float))
    du = cone.u[1] - cone.u[0]
    closed = np.isclose(cone.u[-1] + du - cone.u[0], 2 * np.pi)
    if closed:
        dv = (np.roll(cone.dirs, -1, axis=0) - np.roll(cone.dirs, 1, axis=0)) / (2 * du)
    else:
        dv = fd_derivative(cone.dirs, du, 1)
    f, g = fg(sf, t / sf.R)
    P = conical_patch(sf, cone.vertex, cone.dirs, t)
    Pu = sf.R * g[None, :, None] * dv[:, None, :]
    Pt = (-sf.epsilon / sf.R * g)[None, :, None] * cone.vertex + f[None, :, None] * cone.dirs[:, None, :]
    normals = oriented_complement(sf, np.stack([P, Pu, Pt], axis=-2))
    eta = oriented_complement(sf, np.stack(
        [np.broadcast_to(cone.vertex, cone.dirs.shape), dv, cone.dirs], axis=-2))
    return normals, eta


def conical_concircularity(cone, t):
    """``(lam_mean, deviation, ruling_variation)`` for the vertex axis."""
    normals, eta = conical_normals(cone, t)
    lam = inner(normals, cone.vertex, cone.sf)
    mean = float(np.mean(lam))
    variation = float(np.max(np.linalg.norm(normals - eta[:, None, :], axis=-1)))
    return mean, float(np.max(np.abs(lam - mean))), variation


class RuledHelixPatch:
    """Ruled surface over a helix with unit modified-Darboux rulings.

    ``X(s, z) = f(z/R) gamma(s) + R g(z/R) (rho T + B)/sqrt(1 + rho^2)``.
    Off-grid values use cubic splines of the helix samples.
    """

    def __init__(self, curve, axis, lam, z_range=(-0.3, 0.3)):
        self.curve = curve
        self.sf = curve.sf
        self.axis = axis
        self.lam = lam
        self.z_range = tuple(z_range)
        rho = curve.tau / curve.kappa
        D = (rho[:, None] * curve.T + curve.B) / np.sqrt(1 + rho ** 2)[:, None]
        self._gamma = CubicSpline(curve.s, curve.gamma, axis=0)
        self._T = CubicSpline(curve.s, curve.T, axis=0)
        self._dT = self._T.derivative()
        self._N = CubicSpline(curve.s, curve.N, axis=0)
        self._D = CubicSpline(curve.s, D, axis=0)
        self._dD = self._D.derivative()
        self._ddD = self._D.derivative(2)

    @property
    def param_range(self):
        return (self.curve.s[0], self.curve.s[-1]), self.z_range

    def check_domain(self, s, z):
        s, z = np.asarray(s), np.asarray(z)
        (s0, s1), (z0, z1) = self.param_range
        if np.any(s < s0 - EDGE_TOL) or np.any(s > s1 + EDGE_TOL) \
                or np.any(z < z0 - EDGE_TOL) or np.any(z > z1 + EDGE_TOL):
            raise DomainError("(s, z) outside the ruled patch")

    def _fg(self, z):
        f, g = fg(self.sf, np.asarray(z, dtype=float) / self.sf.R)
        return f[..., None], g[..., None]

    def point(self, s, z, check=True):
        if check:
            self.check_domain(s, z)
        f, g = self._fg(z)
        return renormalize(self.sf, f * self._gamma(s) + self.sf.R * g * self._D(s))

    def partials(self, s, z):
        self.check_domain(s, z)
        sf = self.sf
        f, g = self._fg(z)
        gam, D = self._gamma(s), self._D(s)
        X = f * gam + sf.R * g * D
        Xs = f * self._T(s) + sf.R * g * self._dD(s)
        Xz = -sf.epsilon / sf.R * g * gam + f * D
        return X, Xs, Xz

    def second_partials(self, s, z):
        self.check_domain(s, z)
        sf = self.sf
        f, g = self._fg(z)
        X = f * self._gamma(s) + sf.R * g * self._D(s)
        Xss = f * self._dT(s) + sf.R * g * self._ddD(s)
        Xsz = -sf.epsilon / sf.R * g * self._T(s) + f * self._dD(s)
        return Xss, Xsz, -sf.C * X

    def normal(self, s, z):
        """Unit normal, oriented to agree with ``N_gamma`` along ``z = 0``."""
        X, Xs, Xz = self.partials(s, z)
        return -oriented_complement(self.sf, np.stack([X, Xs, Xz], axis=-2))

    def tangent_frame(self, s, z):
        _, Xs, Xz = self.partials(s, z)
        e1, e2 = [], []
        Xs, Xz = np.atleast_2d(Xs), np.atleast_2d(Xz)
        for a, b in zip(Xs, Xz):
            u, w = gram_schmidt(self.sf, [a, b])
            e1.append(u)
            e2.append(w)
        return np.array(e1), np.array(e2)


def ruled_from_helix(curve, axis=None, z_range=(-0.3, 0.3), tol=1e-5, nz=9):
    """Ruled surface through a proper concircular helix along its Darboux
    direction, certified concircular with the helix as a geodesic.

    Raises :class:`CertificationError` with stage ``"helix"`` if the input
    is not a concircular helix, ``"proper"`` if it is planar or has
    ``lambda = 0``, ``"normal"`` if the patch normal is not ``N_gamma`` at
    ``z = 0`` and ``"concircular"`` if ``<N, p0>`` is not constant.
    """
    report = certify_helix(curve, axis)
    if not report.certified:
        raise CertificationError("input is not a certified concircular helix", stage="helix")
    if report.classification not in ("case1", "case2"):
        raise CertificationError(f"helix is not proper ({report.classification})", stage="proper")
    patch = RuledHelixPatch(curve, report.axis, report.lam, z_range)
    s = curve.s
    N0 = patch.normal(s, np.zeros_like(s))
    gap = float(np.max(np.linalg.norm(N0 - curve.N, axis=-1)))
    if gap > tol:
        raise CertificationError(f"normal differs from N_gamma by {gap:.2e}", stage="normal", value=gap)
    S_, Z_ = np.meshgrid(s[::max(1, s.size // 40)], np.linspace(*z_range, nz), indexing="ij")
    lam = inner(patch.normal(S_, Z_), report.axis.p0, curve.sf)
    dev = float(np.max(np.abs(lam - lam.mean())))
    if dev > tol:
        raise CertificationError(f"<N, p0> varies by {dev:.2e}", stage="concircular", value=dev)
    patch.concircularity_deviation = dev
    patch.normal_gap = gap
    return patch
