import numpy as np
import pytest

from sfgeo import corpus
from sfgeo.ambient import SpaceForm, inner, on_manifold_defect
from sfgeo.curves import CurveSpec, HelixCase1Spec, integrate_frenet, random_frame, synthesize_case1
from sfgeo.errors import CertificationError, DomainError
from sfgeo.geodesics import (GeodesicState, SurfaceCurve, formula_consistency, geodesic_defect,
                             geodesic_is_helix, helix_roundtrip, integrate_geodesic,
                             integrate_geodesic_generic)
from sfgeo.surfaces import ConcircularSurface, integrate_profile, make_umbilical


@pytest.fixture(scope="module")
def surface():
    Q = make_umbilical(SpaceForm(1.0), [0, 0, 0, 1.0], 0.4)
    prof = integrate_profile(Q, lambda t: 0.3 + 0.2 * np.sin(2 * t), t_range=(0.0, 1.5))
    return ConcircularSurface(prof, 0.7, (-0.4, 0.4))


@pytest.fixture(scope="module")
def geodesic(surface):
    return integrate_geodesic(surface, GeodesicState(0.4, 0.0, 0.8), (0.0, 0.6))


def test_ruling_is_a_geodesic(surface):
    sol = integrate_geodesic(surface, GeodesicState(0.5, -0.2, 0.0), (0.0, 0.4))
    np.testing.assert_allclose(sol.t, 0.5, atol=1e-14)
    np.testing.assert_allclose(sol.z, sol.s - 0.2, atol=1e-12)
    np.testing.assert_allclose(sol.kappa_pred, 0.0, atol=1e-14)
    r = geodesic_defect(surface, sol)
    assert r.defect <= 1e-6 and np.isnan(r.collinearity_angle)


def test_unit_speed_and_on_surface(surface, geodesic):
    assert geodesic.unit_speed_defect() <= 1e-8
    assert np.max(on_manifold_defect(surface.sf, geodesic.points)) <= 1e-10
    np.testing.assert_allclose(geodesic.points, surface.point(geodesic.t, geodesic.z), atol=1e-14)


def test_acceleration_is_normal(surface, geodesic):
    r = geodesic_defect(surface, geodesic)
    assert r.defect <= 1e-5
    assert r.collinearity_angle <= 1e-3


def test_predicted_apparatus_matches_oracle(surface, geodesic):
    fc = formula_consistency(surface, geodesic)
    assert fc.n_samples > 100
    assert max(fc.kappa_gap, fc.tau_gap, fc.binormal_gap) <= 1e-4


def test_predicted_frame_is_orthonormal(surface, geodesic):
    c = geodesic.embedded
    sf = surface.sf
    for a in (c.T, c.N, c.B):
        np.testing.assert_allclose(inner(a, a, sf), 1.0, atol=1e-8)
    np.testing.assert_allclose(inner(c.T, c.B, sf), 0.0, atol=1e-8)
    np.testing.assert_allclose(inner(c.N, c.B, sf), 0.0, atol=1e-8)
    assert np.all(geodesic.kappa_pred >= 0)


def test_geodesic_is_a_helix(surface, geodesic):
    lam, dev = geodesic_is_helix(surface, geodesic)
    assert dev <= 1e-5
    assert lam == pytest.approx(surface.lam_expected, abs=1e-5)


def test_generic_integrator_agrees(surface, geodesic):
    G = surface.ruling_speed(0.4, 0.0)
    gen = integrate_geodesic_generic(surface, 0.4, 0.0, np.sin(0.8) / G, np.cos(0.8), (0.0, 0.6))
    np.testing.assert_allclose(gen.points, geodesic.points, atol=1e-9)


def test_negative_control(surface, geodesic):
    # same start, but the parameter curve bends the wrong way
    bent = SurfaceCurve(geodesic.s, geodesic.t + 0.3 * geodesic.s ** 2, geodesic.z)
    assert geodesic_defect(surface, bent).defect > 1e-2


def test_leaving_the_domain(surface):
    with pytest.raises(DomainError):
        integrate_geodesic(surface, GeodesicState(0.4, 0.3, 0.0), (0.0, 1.0))
    with pytest.raises(DomainError):
        integrate_geodesic(surface, GeodesicState(2.0, 0.0, 0.5), (0.0, 0.1))


def test_random_corpus(sf, rng):
    S = corpus.random_surface(rng, sf)
    sol = corpus.random_geodesic(rng, S)
    assert geodesic_defect(S, sol).defect <= 1e-5
    fc = formula_consistency(S, sol)
    assert max(fc.kappa_gap, fc.tau_gap, fc.binormal_gap) <= 1e-4


def test_geodesics_of_a_cone_are_rectifying(sf, rng):
    S = corpus.random_surface(rng, sf, angle=np.pi / 2, z_range=(-0.3, 0.3))
    assert S.lam_expected == pytest.approx(0.0, abs=1e-15)
    sol = corpus.random_geodesic(rng, S, length=0.4)
    lam, dev = geodesic_is_helix(S, sol)
    assert abs(lam) <= 1e-5 and dev <= 1e-5


@pytest.mark.parametrize("C", [1.0, -1.0])
def test_helix_roundtrip(C):
    hel = synthesize_case1(SpaceForm(C), HelixCase1Spec(1.0, 1.0, 1.0, 0.0), (0.0, 1.0))
    r = helix_roundtrip(hel.curve, hel.axis)
    assert r.section_gap <= 1e-10
    assert r.geodesic_defect <= 1e-5
    assert r.reintegration_gap <= 1e-4
    assert r.lam == pytest.approx(hel.lam, abs=1e-6)


def test_planar_curve_rejected():
    sf = SpaceForm(1.0)
    spec = CurveSpec(lambda s: 1.0, lambda s: 0.0, (0.0, 1.0), random_frame(sf, np.random.default_rng(1)))
    with pytest.raises(CertificationError) as info:
        helix_roundtrip(integrate_frenet(sf, spec))
    assert info.value.stage == "proper"


def test_non_helix_rejected(rng):
    sf, spec = corpus.random_curve_spec(rng, s_max=1.0)
    with pytest.raises(CertificationError) as info:
        helix_roundtrip(integrate_frenet(sf, spec))
    assert info.value.stage == "helix"
