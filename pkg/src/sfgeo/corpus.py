"""Seeded random generators for the property tests and the theorem suite."""

import numpy as np

from .ambient import SpaceForm, random_point, random_unit_tangent
from .concircular import ConcircularField
from .curves import CurveSpec, HelixCase1Spec, random_frame
from .errors import DomainError
from .geodesics import GeodesicState, integrate_geodesic
from .numerics import DEFAULT_STEP
from .surfaces import ConcircularSurface, integrate_profile, make_umbilical


def random_space_form(rng, curvatures=(1.0, -1.0)):
    return SpaceForm(float(rng.choice(curvatures)))


def random_field_sample(rng, sf=None):
    """``(field, p, x)``: a random concircular field, point and unit tangent."""
    sf = random_space_form(rng) if sf is None else sf
    field = ConcircularField(sf, rng.normal(size=sf.dim_ambient))
    p = random_point(sf, rng)
    return field, p, random_unit_tangent(sf, p, rng)


def _smooth(rng, lo, hi, n_modes=2):
    """Random trigonometric polynomial with values in ``[lo, hi]``."""
    amp = rng.uniform(0, 1, n_modes)
    amp *= (hi - lo) / 2 / amp.sum() * rng.uniform(0.3, 1.0)
    freq = rng.uniform(0.3, 2.0, n_modes)
    phase = rng.uniform(0, 2 * np.pi, n_modes)
    centre = rng.uniform(lo + amp.sum(), hi - amp.sum())

    def fn(s):
        return centre + amp @ np.sin(freq * s + phase)

    return fn


def random_curve_spec(rng, s_max=2.0, kappa_range=(0.1, 2.0), tau_range=(-1.5, 1.5), sf=None):
    """Frenet spec with smooth curvature in ``kappa_range`` and a random
    initial frame."""
    sf = random_space_form(rng) if sf is None else sf
    init = random_frame(sf, rng)
    return sf, CurveSpec(_smooth(rng, *kappa_range), _smooth(rng, *tau_range), (0.0, s_max), init)


def random_case1_spec(rng):
    """Case-1 helix parameters with ``mu`` kept positive on a window about 0."""
    rho = float(rng.uniform(0.5, 2.0) * rng.choice([-1, 1]))
    return HelixCase1Spec(rho=rho, m=float(rng.uniform(0.5, 1.5)),
                          mu0=float(rng.uniform(0.7, 1.5)), dmu0=float(rng.uniform(-0.3, 0.3)))


def random_spacelike_unit(rng, sf):
    while True:
        v = rng.normal(size=sf.dim_ambient)
        if sf.C < 0:
            v[0] *= 0.5
        nn = sf.epsilon * v[0] ** 2 + v[1:] @ v[1:]
        if nn > 0.1:
            return v / np.sqrt(nn)


def random_umbilical(rng, sf, d_max=0.7):
    return make_umbilical(sf, random_spacelike_unit(rng, sf), float(rng.uniform(-d_max, d_max) * sf.R))


def random_surface(rng, sf=None, t_range=(0.0, 1.5), z_range=(-0.4, 0.4), step=DEFAULT_STEP,
                   angle=None):
    """Random ``(Q, kappa_delta, a)`` and the corresponding concircular surface."""
    sf = random_space_form(rng) if sf is None else sf
    Q = random_umbilical(rng, sf)
    kd = _smooth(rng, -1.0, 1.0)
    prof = integrate_profile(Q, kd, init=Q.adapted_frame(*rng.uniform(0, 1, 3)), t_range=t_range,
                             step=step)
    a = float(rng.uniform(-np.pi, np.pi)) if angle is None else angle
    return ConcircularSurface(prof, a, z_range)


def random_geodesic(rng, S, length=0.6, step=DEFAULT_STEP, kappa_min=1e-3, tries=50):
    """Geodesic from a random interior start whose predicted curvature stays
    above ``kappa_min`` (``kappa_min=None`` accepts any)."""
    (t0, t1), (z0, z1) = S.profile.t_range, S.z_range
    for _ in range(tries):
        init = GeodesicState(float(rng.uniform(t0 + 0.2 * (t1 - t0), t0 + 0.5 * (t1 - t0))),
                             float(rng.uniform(0.5 * z0, 0.5 * z1)),
                             float(rng.uniform(0.3, 1.3) * rng.choice([-1, 1])))
        try:
            sol = integrate_geodesic(S, init, (0.0, length), step)
        except DomainError:
            continue
        if kappa_min is None or np.min(sol.kappa_pred) >= kappa_min:
            return sol
    raise RuntimeError("no admissible geodesic found")
