"""
Geodesics of concircular surfaces
=================================

On ``Psi_a`` a unit-speed curve ``(t(s), z(s))`` with tangent
``sin(theta) T_delta + cos(theta) X_z`` is a geodesic iff::

    t' = sin(theta) / G,   z' = cos(theta),
    theta' = t' (C R g(z/R) + f(z/R) (sin(a) m + cos(a) kappa_delta(t))),

where ``G = sqrt(E)`` is the speed of ``X_t``. Its curvature and torsion are
then predicted in closed form; the functions below compare those predictions
with an independent finite-difference Frenet oracle.

For patches that are not of the form ``Psi_a`` (the ruled surface over a
helix) :func:`integrate_geodesic_generic` solves the geodesic equations in
patch coordinates from the second partial derivatives.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ambient import fg, inner
from .curves import FrenetCurve, frenet_apparatus, helix_defect
from .errors import CertificationError, DomainError, GeometryError
from .numerics import DEFAULT_STEP, OdeProblem, fd_derivative, integrate
from .surfaces import ConcircularSurface, ruled_from_helix

KAPPA_MIN = 1e-3


@dataclass(frozen=True)
class GeodesicState:
    """Position ``(t, z)`` on the patch and angle ``theta`` from the ruling."""

    t: float
    z: float
    theta: float


@dataclass
class SurfaceCurve:
    """Curve on a patch given by parameter samples ``(t(s), z(s))``."""

    s: np.ndarray
    t: np.ndarray
    z: np.ndarray


@dataclass
class GeodesicSolution(SurfaceCurve):
    """Integrated geodesic of a :class:`ConcircularSurface`.

    ``embedded`` carries the closed-form Frenet apparatus: ``T`` from the
    angle, ``N = sigma * N_surface``, ``B = sigma (cos(theta) T_delta -
    sin(theta) X_z)`` and the predicted curvature and torsion.
    """

    theta: np.ndarray = None
    embedded: FrenetCurve = None
    kappa_pred: np.ndarray = None
    tau_pred: np.ndarray = None
    sigma: float = 1.0
    init: Optional[GeodesicState] = None

    @property
    def states(self):
        return [GeodesicState(float(a), float(b), float(c))
                for a, b, c in zip(self.t, self.z, self.theta)]

    @property
    def points(self):
        return self.embedded.gamma

    def unit_speed_defect(self):
        return self.embedded.unit_speed_defect()


def metric_E(S, t, z):
    """First fundamental form coefficient ``<X_t, X_t>``; raises if not positive."""
    _, Xt, _ = S.partials(t, z)
    E = inner(Xt, Xt, S.sf)
    if np.any(E <= 0):
        raise GeometryError("degenerate ruling: E <= 0")
    return E


def _geodesic_rhs(S):
    sf = S.sf
    sa, ca = np.sin(S.angle_a), np.cos(S.angle_a)
    m = S.Q.m
    kap = S.profile._kappa
    (t0, t1), (z0, z1) = S.profile.t_range, S.z_range

    def rhs(s, y):
        t, z, th = y
        if not (t0 - 1e-9 <= t <= t1 + 1e-9 and z0 - 1e-9 <= z <= z1 + 1e-9):
            raise DomainError(f"geodesic left the parameter domain at s={s:.6g} (t={t:.6g}, z={z:.6g})")
        k = float(kap(t))
        f, g = fg(sf, z / sf.R)
        G = f - sf.R * g * (ca * k + sa * m)
        if G <= 1e-12:
            raise DomainError(f"degenerate ruling (E = {G * G:.3g}) at s={s:.6g}")
        dt = np.sin(th) / G
        dth = dt * (sf.C * sf.R * g + f * (sa * m + ca * k))
        return np.array([dt, np.cos(th), dth])

    return rhs


def integrate_geodesic(S: ConcircularSurface, init: GeodesicState, s_range=(0.0, 1.0),
                       step=DEFAULT_STEP) -> GeodesicSolution:
    """Integrate the angle system and embed the geodesic with its predicted
    curvature and torsion.

    Raises :class:`DomainError` if the geodesic leaves the patch or reaches a
    degenerate ruling.
    """
    S.check_domain(init.t, init.z)
    traj = integrate(OdeProblem(_geodesic_rhs(S), np.array([init.t, init.z, init.theta], float),
                                s_range[0], s_range[1], step))
    t, z, th = traj.y.T
    return embed_geodesic(S, traj.s, t, z, th, init)


def embed_geodesic(S, s, t, z, theta, init=None):
    sf = S.sf
    X, Xt, Xz = S.partials(t, z)
    _, Td, _, _, kd, _ = S.profile.at(t)
    N = S.normal(t, z)
    G = S.ruling_speed(t, z)
    sa, ca = np.sin(S.angle_a), np.cos(S.angle_a)
    m = S.Q.m
    sn, cs = np.sin(theta), np.cos(theta)
    dt = sn / G
    k_raw = sn * dt * (m * ca - sa * kd)
    tau = cs * dt * (-ca * m + sa * kd)
    sigma = 1.0 if k_raw[0] >= 0 else -1.0
    T = sn[:, None] * Td + cs[:, None] * Xz
    B = sigma * (cs[:, None] * Td - sn[:, None] * Xz)
    curve = FrenetCurve(sf, np.asarray(s), X, T, sigma * N, B, sigma * k_raw, tau)
    return GeodesicSolution(np.asarray(s), t, z, theta=theta, embedded=curve,
                            kappa_pred=sigma * k_raw, tau_pred=tau, sigma=sigma, init=init)


@dataclass
class GenericGeodesic(SurfaceCurve):
    """Geodesic of an arbitrary patch from the coordinate equations."""

    dt: np.ndarray = None
    dz: np.ndarray = None
    points: np.ndarray = None


def integrate_geodesic_generic(patch, u0, v0, du0, dv0, s_range=(0.0, 1.0), step=DEFAULT_STEP):
    """Geodesic of ``patch`` with initial coordinates ``(u0, v0)`` and
    coordinate velocity ``(du0, dv0)``.

    Solves ``g (u'', v'') = -(<X_ab u'^a u'^b, X_u>, <..., X_v>)`` with the
    Gram matrix ``g`` of ``(X_u, X_v)``. The normal components of the
    acceleration, including the ``-C X`` term of ``M``, drop out.
    """
    sf = patch.sf

    def rhs(s, y):
        u, v, du, dv = y
        try:
            _, Xu, Xv = patch.partials(u, v)
            Xuu, Xuv, Xvv = patch.second_partials(u, v)
        except DomainError as exc:
            raise DomainError(f"geodesic left the parameter domain at s={s:.6g}") from exc
        acc = Xuu * du * du + 2 * Xuv * du * dv + Xvv * dv * dv
        gram = np.array([[inner(Xu, Xu, sf), inner(Xu, Xv, sf)],
                         [inner(Xu, Xv, sf), inner(Xv, Xv, sf)]])
        b = -np.array([inner(acc, Xu, sf), inner(acc, Xv, sf)])
        ddu, ddv = np.linalg.solve(gram, b)
        return np.array([du, dv, ddu, ddv])

    traj = integrate(OdeProblem(rhs, np.array([u0, v0, du0, dv0], float), s_range[0], s_range[1], step))
    u, v, du, dv = traj.y.T
    return GenericGeodesic(traj.s, u, v, dt=du, dz=dv, points=patch.point(u, v))


def curve_points(S, sol):
    pts = getattr(sol, "points", None)
    return S.point(sol.t, sol.z) if pts is None else pts


@dataclass
class GeodesicDefect:
    defect: float
    collinearity_angle: float


def geodesic_defect(S, sol) -> GeodesicDefect:
    """Tangential part of the ambient acceleration ``gamma'' + C gamma``.

    The acceleration is taken by fourth-order finite differences of the
    sampled points, so the check is independent of the ODE used to produce
    them. The angle between the acceleration and the surface normal is
    reported over the samples with ``|gamma'' + C gamma| >= 1e-3``
    (``nan`` when there are none, as for rulings).
    """
    sf = S.sf
    pts = curve_points(S, sol)
    h = sol.s[1] - sol.s[0]
    acc = fd_derivative(pts, h, order=2, accuracy=4) + sf.C * pts
    e1, e2 = S.tangent_frame(sol.t, sol.z)
    tang = np.hypot(inner(acc, e1, sf), inner(acc, e2, sf))
    N = S.normal(sol.t, sol.z)
    size = np.linalg.norm(acc, axis=-1)
    keep = size >= KAPPA_MIN
    if np.any(keep):
        cosang = np.clip(np.abs(inner(acc[keep], N[keep], sf)) / np.sqrt(np.abs(inner(acc[keep], acc[keep], sf))), 0, 1)
        angle = float(np.max(np.arccos(cosang)))
    else:
        angle = float("nan")
    return GeodesicDefect(float(np.max(tang)), angle)


def geodesic_is_helix(S, sol):
    """``(lambda_mean, deviation)`` of ``<N_gamma, V>`` along a geodesic, with
    ``N_gamma`` from the finite-difference Frenet oracle and ``V`` the
    surface's axis."""
    curve = frenet_apparatus(S.sf, sol.s, curve_points(S, sol), kappa_min=KAPPA_MIN)
    return helix_defect(curve, S.axis)


@dataclass
class FormulaConsistency:
    kappa_gap: float
    tau_gap: float
    binormal_gap: float
    n_samples: int


def formula_consistency(S, sol: GeodesicSolution, kappa_min=KAPPA_MIN, trim=4, stencil_spacing=1e-2):
    """Compare predicted curvature, torsion and binormal with the Frenet
    oracle on the samples where ``kappa >= kappa_min``.

    The oracle uses stencils about ``stencil_spacing`` wide: the torsion
    roundoff grows like ``1/(kappa h^3)`` and geodesic curvatures go down to
    1e-3. ``trim`` stencil widths are dropped at each end, where one-sided
    stencils are least accurate.
    """
    h = sol.s[1] - sol.s[0]
    oracle = frenet_apparatus(S.sf, sol.s, sol.embedded.gamma, kappa_min=0.0,
                              stencil_spacing=stencil_spacing)
    keep = oracle.kappa >= kappa_min
    n_end = trim * max(1, int(round(stencil_spacing / h)))
    if n_end:
        keep[:n_end] = keep[-n_end:] = False
    if not np.any(keep):
        raise GeometryError("curvature below the Frenet threshold everywhere")
    kg = np.max(np.abs(oracle.kappa[keep] - sol.kappa_pred[keep]))
    tg = np.max(np.abs(oracle.tau[keep] - sol.tau_pred[keep]))
    bg = np.max(np.linalg.norm(oracle.B[keep] - sol.embedded.B[keep], axis=-1))
    return FormulaConsistency(float(kg), float(tg), float(bg), int(keep.sum()))


@dataclass
class RoundtripReport:
    section_gap: float
    geodesic_defect: float
    reintegration_gap: float
    lam: float
    patch: object = None


def helix_roundtrip(curve: FrenetCurve, axis=None, z_range=(-0.3, 0.3), step=None,
                    section_tol=1e-10, defect_tol=1e-5, reint_tol=1e-4):
    """Realise a proper concircular helix as a geodesic of a concircular
    surface.

    Builds the ruled surface over the helix and certifies that (i) its
    ``z = 0`` section is the helix, (ii) that section is a geodesic and
    (iii) re-integrating the geodesic equations from the helix's initial
    point and direction reproduces it. Raises :class:`CertificationError`
    whose ``stage`` names the failing step (``"proper"``, ``"helix"``,
    ``"normal"``, ``"concircular"``, ``"section"``, ``"geodesic"`` or
    ``"reintegration"``).
    """
    if np.max(np.abs(curve.tau)) <= 1e-6:
        raise CertificationError("planar curve: not a proper helix", stage="proper")
    patch = ruled_from_helix(curve, axis, z_range=z_range)
    s = curve.s
    zero = np.zeros_like(s)
    gap = float(np.max(np.linalg.norm(patch.point(s, zero) - curve.gamma, axis=-1)))
    if gap > section_tol:
        raise CertificationError(f"z=0 section differs from the helix by {gap:.2e}",
                                 stage="section", value=gap)
    d = geodesic_defect(patch, SurfaceCurve(s, s, zero)).defect
    if d > defect_tol:
        raise CertificationError(f"section is not a geodesic (defect {d:.2e})", stage="geodesic", value=d)
    h = curve.spacing if step is None else step
    geo = integrate_geodesic_generic(patch, s[0], 0.0, 1.0, 0.0, (s[0], s[-1]), h)
    pts = geo.points
    if pts.shape != curve.gamma.shape:
        pts = np.array([np.interp(s, geo.s, pts[:, j]) for j in range(pts.shape[1])]).T
    reint = float(np.max(np.linalg.norm(pts - curve.gamma, axis=-1)))
    if reint > reint_tol:
        raise CertificationError(f"re-integrated geodesic deviates by {reint:.2e}",
                                 stage="reintegration", value=reint)
    return RoundtripReport(gap, d, reint, patch.lam, patch)
