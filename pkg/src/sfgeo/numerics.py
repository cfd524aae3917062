"""Fixed-step RK4 integration and finite-difference derivatives on uniform grids."""

from dataclasses import dataclass
from math import factorial
from typing import Callable, Optional

import numpy as np

from .errors import IntegrationError

DEFAULT_STEP = 1e-3


@dataclass
class OdeProblem:
    """Initial value problem ``y' = rhs(s, y)``, ``y(s_start) = y0``.

    ``post_step`` (optional) maps the state after every accepted step; it is
    the hook used for re-orthonormalising moving frames.
    """

    rhs: Callable
    y0: np.ndarray
    s_start: float
    s_end: float
    step: float = DEFAULT_STEP
    post_step: Optional[Callable] = None

    @property
    def state_dim(self):
        return np.asarray(self.y0).size


@dataclass
class Trajectory:
    s: np.ndarray
    y: np.ndarray

    @property
    def spacing(self):
        return self.s[1] - self.s[0]

    def __len__(self):
        return self.s.size


def uniform_grid(s_start, s_end, step):
    """Uniform grid from ``s_start`` to ``s_end`` with spacing at most ``step``.

    The last node equals ``s_end`` exactly.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    length = abs(s_end - s_start)
    if length == 0:
        raise ValueError("empty integration interval")
    n = max(1, int(np.ceil(length / step - 1e-9)))
    s = s_start + (s_end - s_start) * np.arange(n + 1) / n
    s[-1] = s_end
    return s


def integrate(problem: OdeProblem) -> Trajectory:
    """Classical fourth-order Runge-Kutta on a uniform grid.

    The requested step is shrunk to ``(s_end - s_start)/n`` for the smallest
    integer ``n`` that lands exactly on ``s_end``.
    """
    s = uniform_grid(problem.s_start, problem.s_end, problem.step)
    h = (problem.s_end - problem.s_start) / (s.size - 1)
    f = problem.rhs
    y = np.array(problem.y0, dtype=float)
    out = np.empty((s.size,) + y.shape)
    out[0] = y
    for i in range(s.size - 1):
        si = s[i]
        k1 = f(si, y)
        k2 = f(si + h / 2, y + h / 2 * k1)
        k3 = f(si + h / 2, y + h / 2 * k2)
        k4 = f(si + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if problem.post_step is not None:
            y = problem.post_step(s[i + 1], y)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at s={s[i + 1]!r}", s=s[i + 1])
        out[i + 1] = y
    return Trajectory(s, out)


_WEIGHTS = {}


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative on integer
    ``offsets`` (unit spacing), exact for polynomials of degree < len(offsets)."""
    key = (tuple(offsets), order)
    if key not in _WEIGHTS:
        o = np.asarray(offsets, dtype=float)
        V = np.vander(o, increasing=True).T
        rhs = np.zeros(o.size)
        rhs[order] = factorial(order)
        _WEIGHTS[key] = np.linalg.solve(V, rhs)
    return _WEIGHTS[key]


def fd_derivative(values, spacing, order=1, accuracy=2, dilation=1):
    """Derivative of uniformly sampled data along axis 0.

    Parameters
    ----------
    values : array-like
        Samples, shape ``(n, ...)``.
    spacing : float
        Grid spacing.
    order : {1, 2}
        Derivative order.
    accuracy : {2, 4, 6}
        Truncation order. Interior nodes use central stencils, the first and
        last few nodes one-sided stencils of the same accuracy.
    dilation : int
        Stencil nodes are ``dilation`` samples apart. Each of the
        interleaved subsequences ``values[j::dilation]`` is differentiated on
        its own grid, so the output stays on the full grid while roundoff
        (which scales like ``eps / (dilation * spacing)**order``) drops.

    Returns
    -------
    np.ndarray
        Derivative samples on the same grid.
    """
    if order not in (1, 2) or accuracy not in (2, 4, 6):
        raise ValueError("order must be 1 or 2 and accuracy 2, 4 or 6")
    y = np.asarray(values, dtype=float)
    if dilation > 1:
        out = np.empty_like(y)
        for j in range(dilation):
            out[j::dilation] = fd_derivative(y[j::dilation], spacing * dilation, order, accuracy)
        return out
    n = y.shape[0]
    q = (order + accuracy - 1) // 2
    width = order + accuracy
    if n < max(5, width, 2 * q + 1):
        raise ValueError(f"need at least {max(5, width, 2 * q + 1)} samples, got {n}")
    h = spacing ** order
    out = np.zeros_like(y)
    w = fd_weights(range(-q, q + 1), order)
    for k, wk in zip(range(-q, q + 1), w):
        if wk != 0.0:
            out[q:n - q] += wk * y[q + k:n - q + k]
    for i in range(q):
        offs = range(-i, width - i)
        out[i] = np.tensordot(fd_weights(offs, order), y[:width], axes=1)
        j = n - 1 - i
        offs = range(-(width - 1 - i), i + 1)
        out[j] = np.tensordot(fd_weights(offs, order), y[n - width:], axes=1)
    return out / h
