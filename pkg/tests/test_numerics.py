import numpy as np
import pytest

from sfgeo.errors import IntegrationError
from sfgeo.numerics import OdeProblem, fd_derivative, fd_weights, integrate, uniform_grid


def test_grid_lands_on_end():
    s = uniform_grid(0.0, 1.0, 0.3)
    assert s[-1] == 1.0
    assert len(s) == 5
    np.testing.assert_allclose(np.diff(s), 0.25)


def test_grid_exact_multiple():
    assert len(uniform_grid(0.0, 2.0, 1e-3)) == 2001


@pytest.mark.parametrize("bad", [0.0, -1e-3])
def test_grid_rejects_bad_step(bad):
    with pytest.raises(ValueError):
        uniform_grid(0, 1, bad)


def test_rk4_exponential():
    traj = integrate(OdeProblem(lambda s, y: y, np.array([1.0]), 0.0, 1.0, 1e-3))
    assert traj.y[-1, 0] == pytest.approx(np.e, abs=1e-12)


def test_rk4_fourth_order():
    def err(h):
        traj = integrate(OdeProblem(lambda s, y: np.array([y[1], -y[0]]), np.array([0.0, 1.0]),
                                    0.0, 2.0, h))
        return abs(traj.y[-1, 0] - np.sin(2.0))

    ratio = err(0.1) / err(0.05)
    assert 14 < ratio < 18


def test_post_step_hook_applied():
    seen = []

    def hook(s, y):
        seen.append(s)
        return y / np.linalg.norm(y)

    traj = integrate(OdeProblem(lambda s, y: np.array([-y[1], y[0]]) * 1.1, np.array([1.0, 0.0]),
                                0, 1, 0.1, post_step=hook))
    assert len(seen) == 10
    np.testing.assert_allclose(np.linalg.norm(traj.y, axis=1), 1.0)


def test_non_finite_raises():
    with pytest.raises(IntegrationError) as info, np.errstate(over="ignore", invalid="ignore"):
        integrate(OdeProblem(lambda s, y: y ** 2, np.array([1.0]), 0.0, 2.0, 0.01))
    assert info.value.s is not None


def test_fd_weights_central():
    np.testing.assert_allclose(fd_weights(range(-1, 2), 1), [-0.5, 0, 0.5])
    np.testing.assert_allclose(fd_weights(range(-1, 2), 2), [1, -2, 1])


@pytest.mark.parametrize("accuracy", [2, 4, 6])
@pytest.mark.parametrize("order", [1, 2])
def test_fd_exact_on_polynomials(order, accuracy):
    # stencils of accuracy p are exact on polynomials of degree order + p - 1
    s = np.linspace(0, 1, 21)
    deg = order + accuracy - 1
    y = s ** deg
    exact = deg * s ** (deg - 1) if order == 1 else deg * (deg - 1) * s ** (deg - 2)
    np.testing.assert_allclose(fd_derivative(y, s[1] - s[0], order, accuracy), exact, atol=1e-9)


def test_fd_convergence():
    def err(n):
        s = np.linspace(0, 2, n)
        return np.max(np.abs(fd_derivative(np.sin(s), s[1] - s[0], 1, 4) - np.cos(s)))

    assert err(101) / err(201) > 12


def test_fd_vector_valued():
    s = np.linspace(0, 1, 50)
    Y = np.column_stack([s, s ** 2])
    D = fd_derivative(Y, s[1] - s[0])
    np.testing.assert_allclose(D[:, 1], 2 * s, atol=1e-10)


def test_fd_too_few_samples():
    with pytest.raises(ValueError, match="at least"):
        fd_derivative(np.ones(3), 0.1)


def test_dilated_stencil_matches_plain_on_smooth_data():
    s = np.linspace(0, 1, 401)
    y = np.sin(3 * s)
    D = fd_derivative(y, s[1] - s[0], 1, 4, dilation=3)
    np.testing.assert_allclose(D, 3 * np.cos(3 * s), atol=1e-7)


def test_dilation_reduces_roundoff():
    s = np.linspace(0, 1, 1001)
    noisy = np.sin(s) + 1e-13 * np.random.default_rng(0).standard_normal(s.size)
    err = [np.max(np.abs(fd_derivative(noisy, 1e-3, 2, 4, dilation=k) + np.sin(s))[50:-50])
           for k in (1, 4)]
    assert err[1] < err[0] / 5


def test_rk4_order_on_exponential():
    def err(h):
        traj = integrate(OdeProblem(lambda s, y: y, np.array([1.0]), 0.0, 1.0, h))
        return abs(traj.y[-1, 0] - np.e)

    assert 12 <= err(0.1) / err(0.05) <= 20


def test_second_order_stencils_converge_quadratically():
    def err(n):
        s = np.linspace(0, 2, n)
        return np.max(np.abs(fd_derivative(np.sin(s), s[1] - s[0], 1, 2) - np.cos(s)))

    assert 3 <= err(101) / err(201) <= 5
