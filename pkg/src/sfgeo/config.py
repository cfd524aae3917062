"""Run configuration shared by the CLI and the theorem suite."""

import os
from dataclasses import dataclass, field
from typing import Dict, Optional

from .numerics import DEFAULT_STEP

STEP_ENV = "SFGEO_STEP"

DEFAULT_TOLERANCES = {
    "certify": 1e-6,      # concircularity and helix deviations
    "oracle": 1e-4,       # comparisons against the finite-difference Frenet oracle
    "residual": 1e-4,     # helix structure-equation residuals
    "geodesic": 1e-5,     # geodesic defect and helix deviation along geodesics
    "control": 1e-2,      # negative controls must exceed this
}


def default_step():
    """Step from ``$SFGEO_STEP`` if set, else the library default."""
    raw = os.environ.get(STEP_ENV)
    if raw is None or raw == "":
        return DEFAULT_STEP
    try:
        step = float(raw)
    except ValueError:
        raise ValueError(f"{STEP_ENV} must be a positive number, got {raw!r}") from None
    if not step > 0:
        raise ValueError(f"{STEP_ENV} must be a positive number, got {raw!r}")
    return step


@dataclass
class RunConfig:
    seed: int = 42
    step: float = field(default_factory=default_step)
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        bad = [k for k, v in self.tolerances.items() if not v > 0]
        if bad:
            raise ValueError(f"tolerances must be positive: {bad}")
        if self.format not in ("csv", "json", "obj"):
            raise ValueError(f"unknown format {self.format!r}")

    def tol(self, name):
        return self.tolerances[name]
