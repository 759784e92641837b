import numpy as np
import pytest
from numpy.testing import assert_allclose

from oica.analytic2d import (
    Config2D,
    check_path,
    fd_theta_gradient,
    path_config,
    path_cost,
    path_gradient,
    path_hessian,
    path_hessian_eigs,
    theta2_grid,
    theta_cost,
    theta_gradient,
    to_basis,
)
from oica.core import CostKind, CostVariant


def test_to_basis():
    w = to_basis(path_config(0.0))
    assert_allclose(w, [[1, 0], [0, 1], [1, 0], [0, 1]], atol=1e-15)
    w = to_basis(Config2D(np.pi / 2, np.pi / 4, np.pi / 2))
    assert_allclose(w[2], [np.sqrt(2) / 2, np.sqrt(2) / 2])
    assert_allclose(to_basis((0.0, 0.0, 0.0)), np.tile([1.0, 0.0], (4, 1)))


def test_path_cost():
    assert path_cost("l2", 1.234) == 4.0
    assert path_cost("l4", 0.0) == pytest.approx(4.0)
    assert path_cost("l4", np.pi / 4) == pytest.approx(2.0)
    assert path_cost(CostKind(CostVariant.L4), np.pi / 4) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        path_cost("coulomb", 0.0)


def test_path_gradient():
    assert np.array_equal(path_gradient("l2", 0.7), np.zeros(3))
    assert_allclose(path_gradient("l4", np.pi / 8), [2.0, -4.0, -2.0])
    assert_allclose(path_gradient("l4", np.pi / 4), np.zeros(3), atol=1e-14)


def test_path_hessian():
    assert_allclose(
        path_hessian("l2", np.pi / 4), [[4, 0, 0], [0, 0, 0], [0, 0, 4]], atol=1e-14
    )
    assert_allclose(
        path_hessian("l4", 0.0), [[-8, 8, 8], [8, -16, -8], [8, -8, -8]]
    )


def test_path_hessian_eigs():
    assert_allclose(path_hessian_eigs("l2", np.pi / 6), [0.0, 2.0, 6.0], atol=1e-14)
    for theta2 in (0.1, 0.9, 2.5):
        assert path_hessian_eigs("l2", theta2)[0] == 0.0
    # 4 (cos 2θ2 − cos 4θ2) = 4 and 14 ± 2√33 at θ2 = π/4
    eigs = path_hessian_eigs("l4", np.pi / 4)
    assert_allclose(eigs, sorted([4.0, 14 - 2 * np.sqrt(33), 14 + 2 * np.sqrt(33)]))
    assert np.all(eigs >= 0)
    assert_allclose(eigs, np.linalg.eigvalsh(path_hessian("l4", np.pi / 4)))


def test_theta_gradient_chain_rule():
    cfg = Config2D(1.1, 0.3, 2.0)
    for kind in ("l2", "l4"):
        assert_allclose(
            theta_gradient(kind, cfg), fd_theta_gradient(kind, cfg), atol=1e-7
        )
    assert_allclose(theta_gradient("l4", path_config(np.pi / 8)), [2, -4, -2], atol=1e-12)


@pytest.mark.parametrize("kind", ["l2", "l4"])
def test_closed_forms_on_grid(kind):
    """

    Closed forms against the numerical costs on the 720-point grid

    """

    grid = theta2_grid(720)
    assert grid.size == 720
    assert grid[-1] < 2 * np.pi
    for theta2 in grid:
        check = check_path(kind, theta2)
        assert abs(check.cost_closed - check.cost_numeric) < 1e-10
        assert check.max_grad_err < 1e-6
        assert check.max_hess_err < 1e-5
        assert check.max_eig_err < 1e-8
        assert check.max_fd_eig_err < 1e-5


def test_l2_path_is_flat():
    values = [theta_cost("l2", path_config(t)) for t in theta2_grid(720)]
    assert np.ptp(values) < 1e-12


def test_l4_saddles_and_minima():
    for n in range(4):
        assert path_hessian_eigs("l4", n * np.pi / 2)[0] < 0
        assert np.all(path_hessian_eigs("l4", (2 * n + 1) * np.pi / 4) >= -1e-12)


def test_cost_offset():
    check = check_path("l2", 0.3, cost_offset=1e-6)
    assert abs(check.cost_closed - check.cost_numeric) == pytest.approx(1e-6, rel=1e-6)
