"""
Curves in M^3(C): Frenet apparatus and concircular helices
==========================================================

Frames are stored row-wise as ``(gamma, T, N, B)`` with the orientation
convention ``det[gamma, T, N, B] > 0``; with it the principal normal is
fixed by ``kappa > 0`` and the binormal by orientation, so torsion has a
well-defined sign.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .ambient import (SpaceForm, fg, inner, norm, oriented_complement,
                      random_point, renormalize, tangent_basis,
                      tangent_project)
from .concircular import ConcircularField
from .errors import CertificationError, GeometryError
from .numerics import DEFAULT_STEP, OdeProblem, fd_derivative, integrate, uniform_grid

FRAME_TOL = 1e-8
KAPPA_FLOOR = 1e-4


@dataclass
class FrenetState:
    gamma: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray

    def rows(self):
        return np.array([self.gamma, self.T, self.N, self.B], dtype=float)

    def defect(self, sf):
        """Max deviation of the Gram matrix of ``(sqrt|C| gamma, T, N, B)``
        from ``diag(eps, 1, 1, 1)``."""
        return frame_defect(sf, self.rows()[None])[0]

    def check(self, sf, tol=FRAME_TOL):
        d = self.defect(sf)
        if d > tol:
            raise GeometryError(f"Frenet frame not orthonormal (defect {d:.2e})")
        if np.linalg.det(self.rows()) <= 0:
            raise GeometryError("Frenet frame must be positively oriented")
        return self


def frame_defect(sf, frames):
    """Orthonormality defect of stacked frames of shape ``(k, 4, 4)``."""
    F = np.array(frames, dtype=float)
    F[:, 0] *= np.sqrt(abs(sf.C))
    G = np.einsum("kia,kja,a->kij", F, F, sf.metric)
    target = np.diag([sf.epsilon, 1.0, 1.0, 1.0])
    return np.max(np.abs(G - target), axis=(1, 2))


def default_frame(sf):
    """``gamma = R e1``, ``T = e2``, ``N = e3``, ``B = e4``."""
    E = np.eye(4)
    return FrenetState(sf.R * E[0], E[1], E[2], E[3])


def random_frame(sf, rng):
    """Random positively oriented Frenet frame at a random point."""
    p = random_point(sf, rng)
    T, N, B = tangent_basis(sf, p, exclude=())
    M = np.array([rng.normal(size=3) for _ in range(3)])
    Q, _ = np.linalg.qr(M)
    T, N, B = Q.T @ np.array([T, N, B])
    if np.linalg.det(np.array([p, T, N, B])) < 0:
        B = -B
    return FrenetState(p, T, N, B)


@dataclass
class CurveSpec:
    """Curvature and torsion functions on an arclength interval."""

    kappa: Callable
    tau: Callable
    s_range: Tuple[float, float]
    init: Optional[FrenetState] = None


@dataclass
class FrenetCurve:
    """Arclength-sampled curve with its Frenet frame and curvatures."""

    sf: SpaceForm
    s: np.ndarray
    gamma: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray

    @property
    def spacing(self):
        return self.s[1] - self.s[0]

    def __len__(self):
        return self.s.size

    @property
    def frames(self):
        return np.stack([self.gamma, self.T, self.N, self.B], axis=1)

    def frame_defect(self):
        return float(np.max(frame_defect(self.sf, self.frames)))

    def unit_speed_defect(self):
        """Max ``| ||gamma'|| - 1 |`` with a fourth-order difference quotient."""
        d = fd_derivative(self.gamma, self.spacing, 1, accuracy=4)
        return float(np.max(np.abs(norm(d, self.sf) - 1.0)))

    @property
    def rho(self):
        """Lancret curvature ``tau / kappa``."""
        return self.tau / self.kappa


def reorthonormalize(sf, rows):
    """Metric Gram-Schmidt of ``(gamma, T, N, B)`` keeping ``gamma`` on M.

    Classical Gram-Schmidt, which is accurate here because the input is an
    RK4 step away from orthonormal.
    """
    g = sf.metric
    Y = np.array(rows, dtype=float)
    Y[0] /= np.sqrt(sf.C * ((Y[0] * Y[0]) @ g))
    scale = np.ones(Y.shape[0])
    scale[0] = 1.0 / sf.C
    for i in range(1, Y.shape[0]):
        coef = ((Y[:i] * g) @ Y[i]) / scale[:i]
        v = Y[i] - coef @ Y[:i]
        nv = (v * v) @ g
        if nv < 1e-12:
            raise GeometryError("Frenet frame degenerated during integration")
        Y[i] = v / np.sqrt(nv)
    return Y


def integrate_frenet(sf, spec, step=DEFAULT_STEP):
    """Integrate the Frenet-Serret system of M^3(C) with RK4.

    ``gamma' = T``, ``T' = -C gamma + kappa N``, ``N' = -kappa T + tau B``,
    ``B' = -tau N``; the frame is re-orthonormalised after every step.
    """
    if sf.n != 3:
        raise GeometryError("curves are implemented in M^3(C) only")
    init = spec.init if spec.init is not None else default_frame(sf)
    init.check(sf)
    C = sf.C
    kappa, tau = spec.kappa, spec.tau

    def rhs(s, y):
        g, T, N, B = y
        k = kappa(s)
        if not k > 0:
            raise GeometryError(f"curvature must be positive, got {k!r} at s={s!r}")
        t = tau(s)
        return np.array([T, -C * g + k * N, -k * T + t * B, -t * N])

    problem = OdeProblem(rhs, init.rows(), spec.s_range[0], spec.s_range[1], step,
                         post_step=lambda s, y: reorthonormalize(sf, y))
    traj = integrate(problem)
    s = traj.s
    k = np.array([kappa(si) for si in s], dtype=float)
    t = np.array([tau(si) for si in s], dtype=float)
    Y = traj.y
    return FrenetCurve(sf, s, Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3], k, t)


def frenet_apparatus(sf, s, points, kappa_min=1e-6, speed_tol=1e-4, stencil_spacing=1.5e-2, accuracy=6):
    """Recover ``T, N, B, kappa, tau`` from points sampled at unit speed.

    Derivatives use finite differences of order ``accuracy``: ``T = gamma'``,
    ``kappa N = gamma'' + C gamma``, ``B`` completes a positively oriented
    frame and ``tau = <N', B>``. Stencil nodes are spread to roughly
    ``stencil_spacing`` apart (see ``dilation`` in
    :func:`~sfgeo.numerics.fd_derivative`): torsion is a third derivative of
    the samples, and with adjacent nodes on a 1e-3 grid its roundoff alone
    reaches 1e-5 on H^3, worst at the one-sided ends. Sixth order at 1.5e-2
    balances roundoff against truncation.
    """
    s = np.asarray(s, dtype=float)
    g = np.asarray(points, dtype=float)
    h = s[1] - s[0]
    if np.max(np.abs(np.diff(s) - h)) > 1e-9 * max(1.0, abs(h)):
        raise GeometryError("frenet_apparatus needs a uniform grid")
    k = max(1, min(int(round(stencil_spacing / h)), s.size // 8))
    T = fd_derivative(g, h, 1, accuracy=accuracy, dilation=k)
    speed = norm(T, sf)
    if np.max(np.abs(speed - 1.0)) > speed_tol:
        raise GeometryError(
            f"input is not unit speed (max deviation {np.max(np.abs(speed - 1)):.2e})")
    T = T / speed[:, None]
    acc = fd_derivative(g, h, 2, accuracy=accuracy, dilation=k) + sf.C * g
    acc = acc - inner(acc, T, sf)[:, None] * T
    kappa = norm(acc, sf)
    if np.min(kappa) < kappa_min:
        raise GeometryError(
            f"curvature {np.min(kappa):.2e} below {kappa_min:g}: Frenet frame undefined")
    N = acc / kappa[:, None]
    B = oriented_complement(sf, np.stack([g, T, N], axis=1))
    dN = fd_derivative(N, h, 1, accuracy=accuracy, dilation=k)
    tau = inner(dN, B, sf)
    return FrenetCurve(sf, s, g, T, N, B, kappa, tau)


def helix_defect(curve, field):
    """Mean of ``lambda(s) = <N(s), V(gamma(s))>`` and its max deviation."""
    lam = inner(curve.N, field.vector(curve.gamma), curve.sf)
    mean = float(np.mean(lam))
    return mean, float(np.max(np.abs(lam - mean)))


@dataclass
class AxisDecomposition:
    """Components of the axis along the Frenet frame, ``V = aT + lam N + bB``.

    ``residuals`` holds the three structure-equation columns
    ``a' - lam kappa - mu``, ``a kappa - b tau`` and ``b' + lam tau``.
    """

    s: np.ndarray
    a: np.ndarray
    lam: np.ndarray
    b: np.ndarray
    mu: np.ndarray
    residuals: Tuple[np.ndarray, np.ndarray, np.ndarray]
    reconstruction_error: float

    def rectifying_slope(self, b_min=1e-6):
        """``a/b`` on the samples where ``|b| > b_min`` (``b`` may vanish at
        isolated points)."""
        keep = np.abs(self.b) > b_min
        return self.a[keep] / self.b[keep]

    def sup_residuals(self):
        return tuple(float(np.max(np.abs(r))) for r in self.residuals)


def decompose_axis(curve, field):
    sf = curve.sf
    V = field.vector(curve.gamma)
    a = inner(V, curve.T, sf)
    lam = inner(V, curve.N, sf)
    b = inner(V, curve.B, sf)
    mu = field.mu(curve.gamma)
    h = curve.spacing
    da = fd_derivative(a, h, 1, accuracy=4)
    db = fd_derivative(b, h, 1, accuracy=4)
    k, t = curve.kappa, curve.tau
    res = (da - lam * k - mu, a * k - b * t, db + lam * t)
    rec = a[:, None] * curve.T + lam[:, None] * curve.N + b[:, None] * curve.B
    err = float(np.max(np.abs(rec - V)))
    return AxisDecomposition(curve.s, a, lam, b, mu, res, err)


@dataclass
class HelixCase1Spec:
    """Constant-rectifying-slope helix data: ``kappa = m mu``, ``tau = rho kappa``.

    ``mu0`` and ``dmu0`` are the values of ``mu`` and ``mu'`` at the start of
    the requested range.
    """

    rho: float
    m: float
    mu0: float
    dmu0: float

    def __post_init__(self):
        if self.rho == 0:
            raise GeometryError("rho = 0 gives planar curves (planar excluded)")
        if self.m == 0:
            raise GeometryError("m must be nonzero")

    @property
    def lam(self):
        return -1.0 / (self.m * (1.0 + self.rho ** 2))

    def mu_functions(self, sf, s0=0.0):
        """Closed-form ``mu`` and ``mu'`` solving ``mu'' + C rho^2/(1+rho^2) mu = 0``."""
        q = sf.C * self.rho ** 2 / (1.0 + self.rho ** 2)
        w = np.sqrt(abs(q))
        mu0, dmu0 = self.mu0, self.dmu0
        if q > 0:
            def mu(s):
                x = w * (np.asarray(s, dtype=float) - s0)
                return mu0 * np.cos(x) + dmu0 / w * np.sin(x)

            def dmu(s):
                x = w * (np.asarray(s, dtype=float) - s0)
                return -mu0 * w * np.sin(x) + dmu0 * np.cos(x)
        else:
            def mu(s):
                x = w * (np.asarray(s, dtype=float) - s0)
                return mu0 * np.cosh(x) + dmu0 / w * np.sinh(x)

            def dmu(s):
                x = w * (np.asarray(s, dtype=float) - s0)
                return mu0 * w * np.sinh(x) + dmu0 * np.cosh(x)
        return mu, dmu


@dataclass
class SynthesizedHelix:
    curve_spec: CurveSpec
    curve: FrenetCurve
    axis: ConcircularField
    lam: float
    mu: np.ndarray
    s_range: Tuple[float, float]
    truncated: bool = False
    spec: Optional[HelixCase1Spec] = None
    notes: dict = field(default_factory=dict)


def positive_window(s, values, floor=KAPPA_FLOOR):
    """Longest run of consecutive grid nodes with ``values > floor``."""
    ok = np.asarray(values) > floor
    best, start = (0, -1, -1), None
    for i, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[0]:
                best = (i - start, start, i - 1)
            start = None
    if best[0] < 5:
        return None
    return s[best[1]], s[best[2]]


def synthesize_case1(sf, spec, s_range=(0.0, 2.0), step=DEFAULT_STEP, init=None):
    """Build a proper concircular helix with constant Lancret curvature.

    ``mu`` is taken in closed form, ``kappa = m mu`` and ``tau = rho kappa``
    are integrated through the Frenet system, and the axis is assembled from
    ``v = b D + lam N`` with ``b = -mu'/(C rho)`` and ``D = rho T + B``.
    The range is cut to the longest window where ``kappa > 1e-4``.
    """
    s0 = float(s_range[0])
    mu, dmu = spec.mu_functions(sf, s0)
    grid = uniform_grid(s_range[0], s_range[1], step)
    window = positive_window(grid, spec.m * mu(grid))
    if window is None:
        raise GeometryError("m*mu is not positive anywhere on the range (mu vanishing)")
    truncated = window != (grid[0], grid[-1])
    rho, m = spec.rho, spec.m
    cspec = CurveSpec(kappa=lambda s: m * float(mu(s)),
                      tau=lambda s: rho * m * float(mu(s)),
                      s_range=window, init=init)
    curve = integrate_frenet(sf, cspec, step)
    lam = spec.lam
    sa = curve.s[0]
    b = -float(dmu(sa)) / (sf.C * rho)
    v = b * (rho * curve.T[0] + curve.B[0]) + lam * curve.N[0]
    p0 = v - float(mu(sa)) * curve.gamma[0]
    return SynthesizedHelix(cspec, curve, ConcircularField(sf, p0), lam,
                            mu(curve.s), window, truncated, spec)


def synthesize_rectifying(sf, kappa, c, mu0=1.0, dmu0=0.0, s_range=(0.0, 2.0),
                          step=DEFAULT_STEP, init=None):
    """Rectifying curve (``lam = 0`` concircular helix) with prescribed curvature.

    With ``mu = mu0 f(s/R) + dmu0 R g(s/R)`` (so ``mu'' + C mu = 0``) the
    torsion ``tau = kappa mu'/c`` makes ``v = -(mu'/C) T - (c/C) B`` a
    concircular field along the curve with ``<N, v> = 0``.
    """
    if c == 0:
        raise GeometryError("c must be nonzero")
    s0 = float(s_range[0])
    R = sf.R

    def mu(s):
        f, g = fg(sf, (np.asarray(s, dtype=float) - s0) / R)
        return mu0 * f + dmu0 * R * g

    def dmu(s):
        f, g = fg(sf, (np.asarray(s, dtype=float) - s0) / R)
        return -mu0 * sf.epsilon * g / R + dmu0 * f

    cspec = CurveSpec(kappa=kappa, tau=lambda s: kappa(s) * float(dmu(s)) / c,
                      s_range=s_range, init=init)
    curve = integrate_frenet(sf, cspec, step)
    a = -float(dmu(s0)) / sf.C
    b = -c / sf.C
    v = a * curve.T[0] + b * curve.B[0]
    p0 = v - float(mu(s0)) * curve.gamma[0]
    return SynthesizedHelix(cspec, curve, ConcircularField(sf, p0), 0.0,
                            mu(curve.s), tuple(s_range))


def lancret(curve, rho_min=1e-6):
    rho = curve.tau / curve.kappa
    if np.min(np.abs(rho)) < rho_min:
        raise GeometryError("Lancret curvature rho vanishes on the grid (rho undefined)")
    return rho


def case2_residuals(curve, lam, mu, rho_min=1e-6):
    """Sup-norms of ``mu'' + C mu + C lam kappa`` and ``(mu'/rho)' - C lam tau``."""
    rho = lancret(curve, rho_min)
    C, h = curve.sf.C, curve.spacing
    mu = np.asarray(mu, dtype=float)
    dmu = fd_derivative(mu, h, 1, accuracy=4)
    ddmu = fd_derivative(mu, h, 2, accuracy=4)
    r1 = ddmu + C * mu + C * lam * curve.kappa
    r2 = fd_derivative(dmu / rho, h, 1, accuracy=4) - C * lam * curve.tau
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


def axis_candidate(curve, lam, mu):
    """``v = aT + lam N + bB`` with ``a = -mu'/C``, ``b = a/rho``.

    Returns ``(v, Y, vlocal_defect, spread)`` where ``Y = v - mu gamma``
    should be constant and ``vlocal_defect = max ||Dv/ds - mu T||``.
    """
    sf = curve.sf
    rho = lancret(curve) if lam != 0 else curve.tau / curve.kappa
    h = curve.spacing
    mu = np.asarray(mu, dtype=float)
    a = -fd_derivative(mu, h, 1, accuracy=4) / sf.C
    b = a / rho
    v = a[:, None] * curve.T + lam * curve.N + b[:, None] * curve.B
    dv = tangent_project(sf, curve.gamma, fd_derivative(v, h, 1, accuracy=4))
    vlocal = float(np.max(norm(dv - mu[:, None] * curve.T, sf)))
    Y = v - mu[:, None] * curve.gamma
    spread = float(np.max(np.linalg.norm(Y - Y[0], axis=1)))
    return v, Y, vlocal, spread


def reconstruct_axis(curve, lam, mu, tol=1e-5):
    """Axis of a helix from ``lam`` and sampled ``mu``, with certificates.

    Raises :class:`CertificationError` (stage ``"vlocal"`` or
    ``"p0-constancy"``) when the input is not a concircular helix.
    """
    v, Y, vlocal, spread = axis_candidate(curve, lam, mu)
    if vlocal > tol:
        raise CertificationError(
            f"Dv/ds - mu T = {vlocal:.2e} exceeds {tol:g}", stage="vlocal", value=vlocal)
    if spread > tol:
        raise CertificationError(
            f"v - mu gamma varies by {spread:.2e}", stage="p0-constancy", value=spread)
    return ConcircularField(curve.sf, Y[0])


@dataclass
class AxisFit:
    axis: ConcircularField
    lam: float
    deviation: float


def fit_axis(curve):
    """Best ``(p0, lam)`` with ``<N(s), p0> = lam`` in least squares.

    ``(p0, lam)`` is the unit right-singular vector of ``[N, -1]`` for the
    smallest singular value; the sign is chosen with ``lam >= 0``.
    """
    sf = curve.sf
    A = np.hstack([curve.N * sf.metric, -np.ones((len(curve), 1))])
    _, _, Vt = np.linalg.svd(A, full_matrices=False)
    x = Vt[-1]
    if x[-1] < 0:
        x = -x
    p0, lam = x[:-1], x[-1]
    axis = ConcircularField(sf, p0)
    mean, dev = helix_defect(curve, axis)
    return AxisFit(axis, mean, dev)


@dataclass
class HelixReport:
    axis: ConcircularField
    lam: float
    deviation: float
    structure_residuals: Tuple[float, float, float]
    classification: str
    mu_residuals: Optional[Tuple[float, float]]
    certified: bool


def certify_helix(curve, axis=None, tol=1e-6, residual_tol=1e-4, planar_tol=1e-6):
    """Decide whether ``curve`` is a concircular helix and classify it.

    Classes: ``planar`` (zero torsion), ``rectifying`` (``lam = 0``),
    ``case1`` (constant Lancret curvature) or ``case2``.
    """
    if axis is None:
        fit = fit_axis(curve)
        axis, lam, dev = fit.axis, fit.lam, fit.deviation
    else:
        lam, dev = helix_defect(curve, axis)
    dec = decompose_axis(curve, axis)
    res = dec.sup_residuals()
    scale = max(1.0, float(np.linalg.norm(axis.p0)))
    case2 = None
    if np.max(np.abs(curve.tau)) <= planar_tol:
        cls = "planar"
    elif abs(lam) <= tol * scale:
        cls = "rectifying"
    else:
        rho = curve.tau / curve.kappa
        cls = "case1" if np.ptp(rho) <= 1e-6 else "case2"
        try:
            case2 = case2_residuals(curve, lam, axis.mu(curve.gamma))
        except GeometryError:
            case2 = (np.inf, np.inf)
    certified = dev <= tol * scale and max(res) <= residual_tol * scale
    if case2 is not None:
        certified = certified and max(case2) <= residual_tol * scale
    return HelixReport(axis, lam, dev, res, cls, case2, bool(certified))
