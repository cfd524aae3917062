"""Concircular vector fields, helices and surfaces in the space forms S^3 and H^3."""

from .ambient import SpaceForm, exp_map, inner, tangent_project
from .concircular import ConcircularField
from .curves import CurveSpec, FrenetCurve, HelixCase1Spec, integrate_frenet, synthesize_case1
from .errors import CertificationError, DomainError, GeometryError, IntegrationError
from .surfaces import ConcircularSurface, integrate_profile, make_umbilical

__version__ = "0.1.0"

__all__ = [
    "SpaceForm", "exp_map", "inner", "tangent_project", "ConcircularField", "CurveSpec",
    "FrenetCurve", "HelixCase1Spec", "integrate_frenet", "synthesize_case1", "CertificationError",
    "DomainError", "GeometryError", "IntegrationError", "ConcircularSurface", "integrate_profile",
    "make_umbilical",
]
