import numpy as np
import pytest

from sfgeo import corpus
from sfgeo.ambient import SpaceForm, inner, on_manifold_defect
from sfgeo.curves import HelixCase1Spec, integrate_frenet, synthesize_case1
from sfgeo.errors import CertificationError, DomainError, GeometryError
from sfgeo.geodesics import metric_E
from sfgeo.surfaces import (BumpedSurface, ConcircularSurface, ConicalSurface, circle_directions,
                            conical_concircularity, conical_patch, eval_patch, fd_partials,
                            fit_normal_axis, integrate_profile, make_umbilical, ruled_from_helix,
                            ruling_check, surface_concircularity_defect, umbilical_invariants,
                            vertex_of, vertex_parameter)

E4 = [0, 0, 0, 1.0]
SQ = 1 / np.sqrt(2)


@pytest.fixture(scope="module")
def small_sphere():
    return make_umbilical(SpaceForm(1.0), E4, SQ)


@pytest.fixture(scope="module")
def wavy_profile(small_sphere):
    return integrate_profile(small_sphere, lambda t: 0.3 + 0.2 * np.sin(2 * t), t_range=(0.0, 1.0))


class TestUmbilical:
    def test_great_sphere(self):
        Q = make_umbilical(SpaceForm(1.0), E4, 0.0)
        assert Q.k == 0.0 and Q.c == pytest.approx(1.0)
        k, c, defect = umbilical_invariants(Q, Q.sample_points(5))
        assert k <= 1e-6 and defect <= 1e-6

    def test_small_sphere(self, small_sphere):
        assert small_sphere.k == pytest.approx(1.0)
        assert small_sphere.c == pytest.approx(2.0)  # 1/(1 - d^2)
        k, c, defect = umbilical_invariants(small_sphere, small_sphere.sample_points(5))
        assert k == pytest.approx(1.0, abs=1e-4)
        assert c == pytest.approx(2.0, abs=1e-4)
        assert defect <= 1e-6

    def test_degenerate_offset(self):
        with pytest.raises(GeometryError, match="empty or degenerate"):
            make_umbilical(SpaceForm(1.0), E4, 1.0)

    @pytest.mark.parametrize("p0", [[1.0, 0, 0, 0], [1.0, 1.0, 0, 0]], ids=["timelike", "lightlike"])
    def test_non_spacelike_rejected_in_h3(self, p0):
        with pytest.raises(GeometryError, match="spacelike"):
            make_umbilical(SpaceForm(-1.0), p0, 0.3)

    def test_hyperbolic_constants(self):
        Q = make_umbilical(SpaceForm(-1.0), E4, 0.5)
        assert Q.k == pytest.approx(0.5 / np.sqrt(1.25))
        assert Q.c == pytest.approx(-1 / 1.25)

    def test_sample_points_on_q(self, sf, rng):
        Q = corpus.random_umbilical(rng, sf)
        P = Q.sample_points(20, rng)
        np.testing.assert_allclose(Q.level(P), Q.d, atol=1e-12)
        assert np.max(on_manifold_defect(sf, P)) < 1e-12

    def test_orientation_convention(self, sf, rng):
        Q = corpus.random_umbilical(rng, sf)
        p = Q.sample_points(1, rng)[0]
        assert inner(Q.p0_hat, Q.eta2(p), sf) == pytest.approx(Q.A)
        assert Q.A > 0
        assert Q.A * Q.m - Q.B == pytest.approx(0.0, abs=1e-12)

    def test_axis_parallel_to_normal(self, sf, rng):
        Q = corpus.random_umbilical(rng, sf)
        p0, res = fit_normal_axis(Q, Q.sample_points(6, rng))
        assert res <= 1e-6
        cos = p0 @ Q.p0_hat / (np.linalg.norm(p0) * np.linalg.norm(Q.p0_hat))
        assert abs(abs(cos) - 1) < 1e-8

    def test_bump_is_not_umbilical(self, sf, rng):
        bump = BumpedSurface(corpus.random_umbilical(rng, sf))
        pts = bump.sample_points(6, rng)
        np.testing.assert_allclose(bump.F(pts), bump.d, atol=1e-12)
        assert umbilical_invariants(bump, pts)[2] > 1e-2
        assert fit_normal_axis(bump, pts)[1] > 1e-3


class TestProfile:
    def test_great_circle_on_great_sphere(self):
        Q = make_umbilical(SpaceForm(1.0), E4, 0.0)
        prof = integrate_profile(Q, lambda t: 0.0, t_range=(0.0, 3.0))
        assert np.max(np.abs(Q.level(prof.delta))) <= 1e-8
        # geodesics of a totally geodesic sphere are great circles of S^3
        assert np.max(np.abs(inner(prof.T, prof.T, Q.sf) - 1)) < 1e-12
        np.testing.assert_allclose(prof.delta[-1], np.cos(3) * prof.delta[0] + np.sin(3) * prof.T[0],
                                   atol=1e-10)

    def test_circle_closes(self, small_sphere):
        # geodesic circles in Q^2(c) of curvature c0 have length 2 pi / sqrt(c0^2 + c)
        c0 = 0.5
        L = 2 * np.pi / np.sqrt(c0 ** 2 + small_sphere.c)
        prof = integrate_profile(small_sphere, lambda t: c0, t_range=(0.0, L))
        assert np.linalg.norm(prof.delta[-1] - prof.delta[0]) <= 1e-5

    def test_invariants(self, sf, rng):
        Q = corpus.random_umbilical(rng, sf)
        prof = integrate_profile(Q, lambda t: np.cos(t), init=Q.adapted_frame(0.3, 1.0, 0.4),
                                 t_range=(0.0, 2.0))
        assert prof.drift() <= 1e-8
        assert prof.frame_defect() <= 1e-8
        np.testing.assert_allclose(prof.eta2, Q.eta2(prof.delta), atol=1e-8)

    def test_bad_initial_frame(self, small_sphere):
        F = small_sphere.adapted_frame()
        with pytest.raises(GeometryError):
            integrate_profile(small_sphere, lambda t: 0.0, init=F[[0, 2, 1, 3]])
        F2 = F.copy()
        F2[0] = np.array([1.0, 0, 0, 0])
        with pytest.raises(GeometryError, match="not on Q"):
            integrate_profile(small_sphere, lambda t: 0.0, init=F2)

    def test_interpolation_off_grid(self, wavy_profile):
        delta, T, e1, e2, k, dk = wavy_profile.at(0.5005)
        assert on_manifold_defect(wavy_profile.sf, delta) < 1e-14
        assert k == pytest.approx(0.3 + 0.2 * np.sin(1.001), abs=1e-10)
        with pytest.raises(DomainError):
            wavy_profile.at(1.5)


class TestPatch:
    @pytest.fixture
    def surface(self, wavy_profile):
        return ConcircularSurface(wavy_profile, 0.7, (-0.4, 0.4))

    def test_zero_section_is_profile(self, surface, wavy_profile):
        np.testing.assert_allclose(surface.point(wavy_profile.t, 0 * wavy_profile.t), wavy_profile.delta,
                                   atol=1e-14)

    def test_points_on_manifold(self, surface):
        T, Z = np.meshgrid(np.linspace(0, 1, 7), np.linspace(-0.4, 0.4, 5))
        assert np.max(on_manifold_defect(surface.sf, surface.point(T, Z))) <= 1e-10

    def test_normal_certified(self, surface):
        X, Xt, Xz, N = eval_patch(surface, 0.37, 0.21)
        sf = surface.sf
        assert inner(N, N, sf) == pytest.approx(1.0)
        assert abs(inner(N, Xt, sf)) <= 1e-6 and abs(inner(N, Xz, sf)) <= 1e-6

    def test_closed_form_partials_match_differences(self, surface):
        _, Xt, Xz = surface.partials(0.37, 0.21)
        fu, fv = fd_partials(surface, 0.37, 0.21)
        np.testing.assert_allclose(Xt, fu, atol=1e-8)
        np.testing.assert_allclose(Xz, fv, atol=1e-8)
        Xtt, Xtz, Xzz = surface.second_partials(0.37, 0.21)
        h = 1e-4
        _, a, _ = surface.partials(0.37 + h, 0.21)
        _, b, _ = surface.partials(0.37 - h, 0.21)
        np.testing.assert_allclose(Xtt, (a - b) / (2 * h), atol=1e-6)

    def test_out_of_range(self, surface):
        with pytest.raises(DomainError):
            surface.point(0.5, 1.0)

    def test_first_fundamental_form(self, surface):
        assert metric_E(surface, 0.4, 0.0) == pytest.approx(1.0, abs=1e-6)
        e = [metric_E(surface, 0.4, z) for z in (0.1, 0.1 + 1e-4)]
        assert abs(e[1] - e[0]) < 1e-3

    @pytest.mark.parametrize("a", [0.0, 0.7, np.pi / 2, -2.0])
    def test_concircular(self, wavy_profile, a):
        S = ConcircularSurface(wavy_profile, a, (-0.4, 0.4))
        r = surface_concircularity_defect(S)
        assert r.deviation <= 1e-6
        assert r.lam_mean == pytest.approx(S.Q.A * np.cos(a), abs=1e-6)
        assert r.angle == pytest.approx(a, abs=1e-6)

    def test_rulings_follow_the_axis(self, surface):
        assert max(ruling_check(surface).values()) <= 1e-5


class TestVertex:
    def test_sphere_vertex(self, wavy_profile):
        S = ConcircularSurface(wavy_profile, np.pi / 2, (-0.3, 0.3))
        assert vertex_parameter(S) == pytest.approx(np.pi / 4)
        v = vertex_of(S)
        # the rulings meet at the pole p0_hat of the small sphere
        np.testing.assert_allclose(v, E4, atol=1e-6)
        assert metric_E(S, 0.5, 0.3) < metric_E(S, 0.5, 0.0)

    def test_reversed_angle(self, wavy_profile):
        S = ConcircularSurface(wavy_profile, -np.pi / 2, (-0.3, 0.3))
        assert vertex_parameter(S) == pytest.approx(-np.pi / 4)
        assert vertex_of(S) is not None

    def test_absent_in_h3(self):
        Q = make_umbilical(SpaceForm(-1.0), E4, 0.5)
        assert Q.k * Q.sf.R <= 1
        prof = integrate_profile(Q, lambda t: 0.2, t_range=(0.0, 0.5))
        assert vertex_of(ConcircularSurface(prof, np.pi / 2, (-0.3, 0.3))) is None

    def test_requires_lambda_zero(self, wavy_profile):
        with pytest.raises(GeometryError):
            vertex_of(ConcircularSurface(wavy_profile, 0.0, (-0.3, 0.3)))


class TestConical:
    def test_cone(self, sf):
        vertex = np.array([sf.R, 0, 0, 0])
        u, dirs = circle_directions(sf, vertex, opening=0.5, n=48, wobble=0.2)
        P = conical_patch(sf, vertex, dirs, np.array([0.0, 0.3, 0.8]))
        np.testing.assert_allclose(P[:, 0], np.broadcast_to(vertex, (48, 4)), atol=1e-15)
        assert np.max(on_manifold_defect(sf, P)) <= 1e-10
        cone = ConicalSurface(sf, vertex, u, dirs)
        lam, dev, variation = conical_concircularity(cone, np.linspace(0.1, 1.0, 6))
        assert abs(lam) <= 1e-6 and dev <= 1e-6
        assert variation <= 1e-6

    def test_non_tangent_directions(self, sf):
        vertex = np.array([sf.R, 0, 0, 0])
        with pytest.raises(GeometryError, match="tangent"):
            conical_patch(sf, vertex, [[1.0, 0, 0, 0]], [0.1])


class TestRuledFromHelix:
    @pytest.mark.parametrize("C", [1.0, -1.0])
    def test_case1(self, C):
        hel = synthesize_case1(SpaceForm(C), HelixCase1Spec(1.0, 1.0, 1.0, 0.0), (0.0, 1.0))
        P = ruled_from_helix(hel.curve, hel.axis)
        assert P.concircularity_deviation <= 1e-5
        s = hel.curve.s
        np.testing.assert_allclose(P.point(s, 0 * s), hel.curve.gamma, atol=1e-14)
        X, Xs, Xz = P.partials(s[::50], 0.2 + 0 * s[::50])
        N = P.normal(s[::50], 0.2 + 0 * s[::50])
        assert np.max(np.abs(inner(N, Xs, P.sf))) <= 1e-6
        assert np.max(np.abs(inner(N, Xz, P.sf))) <= 1e-6

    def test_rejects_non_helix(self, rng):
        sf, spec = corpus.random_curve_spec(rng, s_max=1.0)
        with pytest.raises(CertificationError) as info:
            ruled_from_helix(integrate_frenet(sf, spec))
        assert info.value.stage == "helix"
