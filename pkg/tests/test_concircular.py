import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfgeo.ambient import SpaceForm, inner, random_point, random_unit_tangent
from sfgeo.concircular import (ConcircularField, basis_fields, concircularity_defect, fit_p0,
                               grad_mu_defect, non_concircular_control)
from sfgeo.errors import GeometryError


def test_north_pole_field_on_sphere():
    # p0 = e1 on S^3(1): at the pole the field vanishes and mu = -1
    sf = SpaceForm(1.0)
    V, mu = ConcircularField(sf, [1.0, 0, 0, 0]).evaluate([1.0, 0, 0, 0])
    np.testing.assert_allclose(V, 0, atol=1e-15)
    assert mu == pytest.approx(-1.0)


def test_hyperbolic_field_value():
    # p0 = e2 at the base point (1,0,0,0) of H^3(1): V = e2, mu = 0
    sf = SpaceForm(-1.0)
    V, mu = ConcircularField(sf, [0, 1.0, 0, 0]).evaluate([1.0, 0, 0, 0])
    np.testing.assert_allclose(V, [0, 1, 0, 0])
    assert mu == 0.0


def test_field_is_tangent(sf, rng):
    field = ConcircularField(sf, rng.normal(size=4))
    P = np.array([random_point(sf, rng) for _ in range(20)])
    np.testing.assert_allclose(inner(field.vector(P), P, sf), 0, atol=1e-12)


def test_off_manifold_point_rejected(sf):
    with pytest.raises(GeometryError):
        ConcircularField(sf, [1.0, 0, 0, 0]).evaluate([5.0, 5.0, 0, 0])


def test_linearity(sf, rng):
    a, b = rng.normal(size=4), rng.normal(size=4)
    p = random_point(sf, rng)
    Fa, Fb = ConcircularField(sf, a), ConcircularField(sf, b)
    np.testing.assert_allclose((Fa + 2.0 * Fb).vector(p), Fa.vector(p) + 2 * Fb.vector(p))


def test_zero_field_has_zero_defect(sf, rng):
    p = random_point(sf, rng)
    x = random_unit_tangent(sf, p, rng)
    assert concircularity_defect(ConcircularField(sf, np.zeros(4)), p, x) == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), C=st.sampled_from([1.0, -1.0, 4.0, -0.25]))
def test_constant_vector_fields_are_concircular(seed, C):
    sf = SpaceForm(C)
    r = np.random.default_rng(seed)
    field = ConcircularField(sf, r.normal(size=4))
    p = random_point(sf, r)
    x = random_unit_tangent(sf, p, r)
    scale = max(1.0, np.linalg.norm(field.p0))
    assert concircularity_defect(field, p, x) <= 1e-6 * scale
    assert grad_mu_defect(field, p) <= 1e-6 * scale


def test_defect_accepts_plain_callable(sf, rng):
    field = ConcircularField(sf, rng.normal(size=4))
    p = random_point(sf, rng)
    x = random_unit_tangent(sf, p, rng)
    assert concircularity_defect(field.vector, p, x, sf=sf) < 1e-6


def test_control_field_is_not_concircular(sf, rng):
    W = non_concircular_control(sf)
    values = []
    for _ in range(40):
        p = random_point(sf, rng)
        values.append(concircularity_defect(W, p, random_unit_tangent(sf, p, rng), sf=sf))
    assert np.mean(np.array(values) > 1e-2) >= 0.9


def test_p0_recovered_from_samples(sf, rng):
    p0 = rng.normal(size=4)
    pts = np.array([random_point(sf, rng) for _ in range(4)])
    est, res = fit_p0(sf, pts, ConcircularField(sf, p0).vector(pts))
    np.testing.assert_allclose(est, p0, atol=1e-10)
    assert res < 1e-12


def test_basis_fields_independent(sf, rng):
    pts = np.array([random_point(sf, rng) for _ in range(4)])
    M = np.array([f.vector(pts).ravel() for f in basis_fields(sf)])
    assert np.linalg.matrix_rank(M) == 4
