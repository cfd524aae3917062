"""
Concircular vector fields on space forms.

Every concircular field on M^n(C) is the tangential part of a constant
ambient vector ``p0``::

    V(p) = p0 + mu(p) p,      mu(p) = -C <p0, p>,

and ``grad mu = -C V``. The defect functions below measure both identities
numerically, with covariant derivatives taken as tangential parts of ambient
difference quotients along geodesics.
"""

from dataclasses import dataclass

import numpy as np

from .ambient import (SpaceForm, as_point, as_tangent, exp_map, inner, norm,
                      tangent_basis, tangent_project)


@dataclass(frozen=True, eq=False)
class ConcircularField:
    """Concircular field determined by the constant vector ``p0``."""

    sf: SpaceForm
    p0: np.ndarray

    def __post_init__(self):
        p0 = np.array(self.p0, dtype=float)
        if p0.shape != (self.sf.dim_ambient,) or not np.all(np.isfinite(p0)):
            raise ValueError("p0 must be a finite ambient vector")
        object.__setattr__(self, "p0", p0)

    def mu(self, p):
        """Concircular factor ``-C <p0, p>``."""
        return -self.sf.C * inner(self.p0, p, self.sf)

    def vector(self, p):
        p = np.asarray(p, dtype=float)
        return self.p0 + self.mu(p)[..., None] * p

    __call__ = vector

    def evaluate(self, p):
        """``(V(p), mu(p))`` after checking that ``p`` lies on the manifold."""
        p = as_point(self.sf, p)
        return self.vector(p), self.mu(p)

    def __add__(self, other):
        return ConcircularField(self.sf, self.p0 + other.p0)

    def __mul__(self, s):
        return ConcircularField(self.sf, s * self.p0)

    __rmul__ = __mul__

    def __repr__(self):
        return f"ConcircularField({self.sf!r}, p0={self.p0.tolist()})"


def evaluate(field, p):
    return field.evaluate(p)


def covariant_derivative(sf, vector_field, p, x, h=1e-4):
    """Levi-Civita derivative of ``vector_field`` at ``p`` along unit ``x``.

    Central difference of the ambient field along the geodesic
    ``exp_p(s x)``, followed by projection to the tangent space (the normal
    part of the ambient derivative is the ``-C<X, Y> p`` term).
    """
    fwd = exp_map(sf, p, x, h, check=False)
    bwd = exp_map(sf, p, x, -h, check=False)
    dV = (vector_field(fwd) - vector_field(bwd)) / (2 * h)
    return tangent_project(sf, p, dV)


def concircularity_defect(field, p, x, h=1e-4, sf=None):
    """``|| nabla_x V - mu(p) x ||`` at ``p``.

    ``field`` is a :class:`ConcircularField` or any callable ``p -> V(p)``
    (then pass ``sf``). For plain callables there is no known factor, so
    ``mu`` is the best fit ``tr(nabla V)/n`` over an orthonormal basis; the
    defect then measures the trace-free part of ``nabla V`` along ``x``.
    """
    sf = getattr(field, "sf", sf)
    p = as_point(sf, p)
    x = as_tangent(sf, p, x, tol=1e-8, unit=True)
    if isinstance(field, ConcircularField):
        if not np.any(field.p0):
            return 0.0
        mu = field.mu(p)
    else:
        frame = tangent_basis(sf, p)
        mu = sum(inner(covariant_derivative(sf, field, p, e, h), e, sf) for e in frame) / sf.n
    cov = covariant_derivative(sf, field, p, x, h)
    return float(norm(cov - mu * x, sf))


def grad_mu_defect(field, p, h=1e-4):
    """``|| grad mu + C V(p) ||`` with the gradient from central differences
    of ``mu`` along an orthonormal tangent basis."""
    sf = field.sf
    p = as_point(sf, p)
    grad = np.zeros(sf.dim_ambient)
    for e in tangent_basis(sf, p):
        d = (field.mu(exp_map(sf, p, e, h, check=False))
             - field.mu(exp_map(sf, p, e, -h, check=False))) / (2 * h)
        grad += d * e
    return float(norm(grad + sf.C * field.vector(p), sf))


def basis_fields(sf):
    """The fields determined by ``p0 = e_1, ..., e_{n+1}``."""
    return [ConcircularField(sf, e) for e in np.eye(sf.dim_ambient)]


def fit_p0(sf, points, vectors):
    """Least-squares ``p0`` with ``p0 - C<p0, p> p = V`` at the given samples.

    Returns ``(p0, residual)``; with ``n+1`` generic points the map
    ``p0 -> V`` restricted to them is injective, so ``p0`` is unique.
    """
    points = np.atleast_2d(points)
    vectors = np.atleast_2d(vectors)
    I = np.eye(sf.dim_ambient)
    blocks = [I - sf.C * np.outer(p, p * sf.metric) for p in points]
    A = np.vstack(blocks)
    b = vectors.reshape(-1)
    p0, *_ = np.linalg.lstsq(A, b, rcond=None)
    return p0, float(np.max(np.abs(A @ p0 - b)))


def non_concircular_control(sf):
    """Smooth tangent field ``p -> (<p, e3> e2)^T`` that is not concircular.

    Used as the negative control for the concircularity tests.
    """
    e2 = np.eye(sf.dim_ambient)[1]
    e3 = np.eye(sf.dim_ambient)[2]

    def field(p):
        p = np.asarray(p, dtype=float)
        return tangent_project(sf, p, inner(p, e3, sf)[..., None] * e2)

    return field
