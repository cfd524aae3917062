"""
Numerical certification suite.

Each check builds a small seeded corpus, measures the relevant defects and
compares them with the tolerances of a :class:`~sfgeo.config.RunConfig`.
Checks are independent: check ``i`` draws from its own generator seeded with
``(seed, i)``, so results do not depend on execution order.
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from . import corpus
from .ambient import SpaceForm, random_point
from .concircular import (ConcircularField, basis_fields, concircularity_defect, fit_p0,
                          grad_mu_defect, non_concircular_control)
from .config import RunConfig
from .curves import (HelixCase1Spec, case2_residuals, fit_axis, helix_defect, integrate_frenet,
                     synthesize_case1)
from .geodesics import formula_consistency, geodesic_defect, geodesic_is_helix, helix_roundtrip
from .surfaces import (BumpedSurface, ConcircularSurface, fit_normal_axis, integrate_profile,
                       make_umbilical, ruling_check, surface_concircularity_defect,
                       umbilical_invariants, vertex_of, vertex_parameter)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _wrap(angle):
    return (angle + np.pi) % (2 * np.pi) - np.pi


def check_concircular_fields(cfg, rng, n=200):
    tol = cfg.tol("certify")
    worst, hits = 0.0, 0
    for _ in range(n):
        field, p, x = corpus.random_field_sample(rng)
        worst = max(worst, concircularity_defect(field, p, x))
        hits += concircularity_defect(non_concircular_control(field.sf), p, x, sf=field.sf) > cfg.tol("control")
    ok = worst <= tol and hits >= 0.95 * n
    return CheckResult("tangential parts of constant vectors are concircular", ok, worst, tol,
                       f"control above {cfg.tol('control'):g} on {hits}/{n}")


def check_gradient_identity(cfg, rng, n=200):
    tol = cfg.tol("certify")
    worst = max(grad_mu_defect(f, p) for f, p, _ in (corpus.random_field_sample(rng) for _ in range(n)))
    return CheckResult("gradient of the concircular factor is -C V", worst <= tol, worst, tol)


def check_dimension(cfg, rng, n=20):
    """The field is determined by ``p0`` (recovered from samples at n+1
    points) and the ``n+1`` basis fields are independent."""
    worst, rank_ok = 0.0, True
    for _ in range(n):
        sf = corpus.random_space_form(rng)
        p0 = rng.normal(size=4)
        pts = np.array([random_point(sf, rng) for _ in range(4)])
        est, _ = fit_p0(sf, pts, ConcircularField(sf, p0).vector(pts))
        worst = max(worst, float(np.max(np.abs(est - p0))))
        M = np.array([f.vector(pts).ravel() for f in basis_fields(sf)])
        rank_ok &= np.linalg.matrix_rank(M, tol=1e-8) == 4
    tol = cfg.tol("certify")
    return CheckResult("concircular fields form an (n+1)-dimensional space", worst <= tol and rank_ok,
                       worst, tol, f"basis rank 4: {rank_ok}")


def check_umbilical_dichotomy(cfg, rng, n=4):
    tol = cfg.tol("certify")
    worst, control = 0.0, np.inf
    for _ in range(n):
        sf = corpus.random_space_form(rng)
        Q = corpus.random_umbilical(rng, sf)
        pts = Q.sample_points(6, rng)
        _, _, defect = umbilical_invariants(Q, pts)
        _, res = fit_normal_axis(Q, pts)
        worst = max(worst, defect, res)
        bump = BumpedSurface(Q)
        _, _, bdef = umbilical_invariants(bump, bump.sample_points(6, rng))
        control = min(control, bdef)
    ok = worst <= tol and control > cfg.tol("control")
    return CheckResult("umbilical surfaces are those with the axis along the normal", ok, worst, tol,
                       f"bump control defect {control:.3g}")


def check_rulings(cfg, rng, n=3):
    tol = cfg.tol("geodesic")
    worst = 0.0
    for _ in range(n):
        S = corpus.random_surface(rng, step=cfg.step)
        worst = max(worst, *ruling_check(S).values())
    return CheckResult("rulings are geodesics along the tangential axis", worst <= tol, worst, tol)


def check_angle_recovery(cfg, rng, n=5):
    tol = cfg.tol("certify")
    worst = 0.0
    for _ in range(n):
        S = corpus.random_surface(rng, step=cfg.step)
        r = surface_concircularity_defect(S)
        worst = max(worst, r.deviation, abs(_wrap(r.angle - S.angle_a)), r.formula_gap)
    return CheckResult("ruled surfaces over umbilical profiles are concircular", worst <= tol, worst, tol)


def check_vertex(cfg, rng):
    tol = cfg.tol("certify")
    sf = SpaceForm(1.0)
    Q = make_umbilical(sf, [0, 0, 0, 1.0], 1 / np.sqrt(2))
    prof = integrate_profile(Q, lambda t: 0.4 * np.sin(t), t_range=(0.0, 1.0), step=cfg.step)
    S = ConcircularSurface(prof, np.pi / 2, (-0.3, 0.3))
    z0 = vertex_parameter(S)
    vertex = vertex_of(S, tol)
    gap = abs(z0 - np.pi / 4)
    hyp = SpaceForm(-1.0)
    Qh = corpus.random_umbilical(rng, hyp)
    proh = integrate_profile(Qh, lambda t: 0.3, t_range=(0.0, 0.5), step=cfg.step)
    absent = vertex_of(ConcircularSurface(proh, np.pi / 2, (-0.3, 0.3))) is None
    ok = gap <= tol and vertex is not None and absent and abs(Q.A * Q.m - Q.B) <= tol
    return CheckResult("cones over umbilical profiles have a vertex", ok, gap, tol,
                       f"H^3 vertex absent (kR={Qh.k * hyp.R:.3f}): {absent}")


def _geodesic_corpus(cfg, rng, n):
    out = []
    for _ in range(n):
        S = corpus.random_surface(rng, step=cfg.step)
        out.append((S, corpus.random_geodesic(rng, S, step=cfg.step)))
    return out


def check_geodesic_formulas(cfg, rng, n=5):
    tol = cfg.tol("oracle")
    worst = 0.0
    for S, sol in _geodesic_corpus(cfg, rng, n):
        fc = formula_consistency(S, sol)
        worst = max(worst, fc.kappa_gap, fc.tau_gap, fc.binormal_gap)
    return CheckResult("curvature and torsion of surface geodesics", worst <= tol, worst, tol)


def check_geodesics_are_helices(cfg, rng, n=5):
    tol = cfg.tol("geodesic")
    worst = 0.0
    for S, sol in _geodesic_corpus(cfg, rng, n):
        worst = max(worst, geodesic_defect(S, sol).defect, geodesic_is_helix(S, sol)[1])
    return CheckResult("geodesics of concircular surfaces are concircular helices", worst <= tol, worst, tol)


def check_helices_are_geodesics(cfg, rng):
    worst, stages = 0.0, []
    for C in (1.0, -1.0):
        spec = HelixCase1Spec(rho=1.0, m=1.0, mu0=1.0, dmu0=0.0) if C > 0 else corpus.random_case1_spec(rng)
        hel = synthesize_case1(SpaceForm(C), spec, s_range=(0.0, 1.0), step=cfg.step)
        try:
            r = helix_roundtrip(hel.curve, hel.axis)
            worst = max(worst, r.reintegration_gap)
        except Exception as exc:
            stages.append(f"C={C:g}: {getattr(exc, 'stage', type(exc).__name__)}")
    tol = cfg.tol("oracle")
    return CheckResult("proper helices are geodesics of concircular surfaces", not stages and worst <= tol,
                       worst, tol, "; ".join(stages))


def check_helix_structure(cfg, rng, n_helix=3, n_control=10):
    tol = cfg.tol("residual")
    worst = 0.0
    for _ in range(n_helix):
        C = float(rng.choice([1.0, -1.0]))
        hel = synthesize_case1(SpaceForm(C), corpus.random_case1_spec(rng), s_range=(0.0, 1.0), step=cfg.step)
        lam, _ = helix_defect(hel.curve, hel.axis)
        worst = max(worst, *case2_residuals(hel.curve, lam, hel.axis.mu(hel.curve.gamma)))
    hits = 0
    for _ in range(n_control):
        sf, spec = corpus.random_curve_spec(rng, s_max=1.0)
        c = integrate_frenet(sf, spec, cfg.step)
        fit = fit_axis(c)
        hits += max(case2_residuals(c, fit.lam, fit.axis.mu(c.gamma))) > cfg.tol("control")
    ok = worst <= tol and hits >= 0.95 * n_control
    return CheckResult("helix structure equations", ok, worst, tol, f"non-helix control above threshold {hits}/{n_control}")


CHECKS: List[Callable] = [
    check_concircular_fields,
    check_gradient_identity,
    check_dimension,
    check_umbilical_dichotomy,
    check_rulings,
    check_angle_recovery,
    check_vertex,
    check_geodesic_formulas,
    check_geodesics_are_helices,
    check_helices_are_geodesics,
    check_helix_structure,
]


def run_all(cfg: RunConfig = None):
    """Run every check; a check that raises is reported as a failure."""
    cfg = RunConfig() if cfg is None else cfg
    results = []
    for i, check in enumerate(CHECKS):
        rng = np.random.default_rng([cfg.seed, i])
        try:
            results.append(check(cfg, rng))
        except Exception as exc:  # reported, not propagated
            name = check.__name__.replace("check_", "").replace("_", " ")
            results.append(CheckResult(name, False, float("nan"), float("nan"),
                                       f"{type(exc).__name__}: {exc}"))
    return results


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  result  {'value':>10}  {'limit':>8}  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.value:>10.3e}  "
                     f"{r.threshold:>8.1e}  {r.detail}")
    return "\n".join(lines)
