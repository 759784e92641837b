import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oica.core import (
    CostKind,
    CostVariant,
    InvalidEpsilon,
    ZeroRow,
    gram,
    project_rows_unit_norm,
    random_rotation,
)
from oica.costs import (
    cost_l2,
    cost_l4,
    cost_coulomb,
    cost_random_prior,
    evaluate,
    grad_check,
    quasi_orth_update,
)

ALL_KINDS = [
    CostKind(CostVariant.L2),
    CostKind(CostVariant.L4),
    CostKind(CostVariant.COULOMB),
    CostKind(CostVariant.RANDOM_PRIOR),
]


def _pathological_2d(theta2):
    angles = np.array([0.0, np.pi / 2, theta2, theta2 + np.pi / 2])
    return np.column_stack((np.cos(angles), np.sin(angles)))


def _random_basis(k, n, seed):
    rng = np.random.default_rng(seed)
    return project_rows_unit_norm(rng.standard_normal((k, n)))


def _two_rows(theta):
    return np.array([[1.0, 0.0], [np.cos(theta), np.sin(theta)]])


def test_l2_values():
    for theta2 in np.linspace(0.0, np.pi, 7):
        assert cost_l2(_pathological_2d(theta2)).value == pytest.approx(4.0, abs=1e-12)
    assert cost_l2(random_rotation(5, np.random.default_rng(3))).value < 1e-25
    assert cost_l2([[1.0, 0.0], [1.0, 0.0]]).value == 2.0


def test_l4_values():
    for theta2 in np.linspace(0.0, np.pi, 9):
        assert cost_l4(_pathological_2d(theta2)).value == pytest.approx(
            3.0 + np.cos(4.0 * theta2), abs=1e-12
        )
    assert cost_l4(_pathological_2d(np.pi / 4)).value == pytest.approx(2.0)
    assert cost_l4(np.eye(3)).value == 0.0


def test_coulomb_values():
    eps = 1e-6
    assert cost_coulomb(np.eye(2), eps).value == pytest.approx(2.0 / np.sqrt(1 + eps))
    assert cost_coulomb([[1.0, 0.0], [1.0, 0.0]], eps).value == pytest.approx(
        2000.0, rel=1e-6
    )
    for theta in (0.3, 1.0, 1.4):
        assert cost_coulomb(_two_rows(theta), eps).value == pytest.approx(
            cost_coulomb(_two_rows(np.pi - theta), eps).value, rel=1e-12
        )
    with pytest.raises(InvalidEpsilon):
        cost_coulomb(np.eye(2), 0.0)


def test_random_prior_values():
    eps = 1e-6
    assert cost_random_prior(np.eye(2), eps).value == pytest.approx(0.0, abs=1e-5)
    assert cost_random_prior([[1.0, 0.0], [1.0, 0.0]], eps).value == pytest.approx(
        -2.0 * np.log(1e-6), rel=1e-6
    )
    values = [
        cost_random_prior(_two_rows(theta), eps).value
        for theta in np.linspace(np.pi / 2, 0.0, 20)
    ]
    assert np.all(np.diff(values) > 0)
    with pytest.raises(InvalidEpsilon):
        cost_random_prior(np.eye(2), -1.0)


def test_orthonormal_basis_is_minimal():
    """

    Among unit-norm 3×3 bases, the orthonormal ones have the lowest cost

    """

    q = random_rotation(3, np.random.default_rng(0))
    for kind in ALL_KINDS:
        best = evaluate(kind, q).value
        for seed in range(10):
            assert evaluate(kind, _random_basis(3, 3, seed)).value >= best - 1e-12


@settings(max_examples=25, deadline=None)
@given(
    k=st.integers(2, 9),
    n=st.integers(2, 5),
    seed=st.integers(0, 2 ** 32 - 1),
)
@pytest.mark.parametrize("kind", ALL_KINDS, ids=str)
def test_cost_invariances(kind, k, n, seed):
    rng = np.random.default_rng(seed)
    w = _random_basis(k, n, seed)
    reference = evaluate(kind, w).value
    rotated = w @ random_rotation(n, rng).T
    permuted = w[rng.permutation(k)]
    flipped = w.copy()
    flipped[k - 1] = -flipped[k - 1]
    for other in (rotated, permuted, flipped):
        assert evaluate(kind, other).value == pytest.approx(reference, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS, ids=str)
def test_gradient_shape(kind):
    w = _random_basis(5, 3, 1)
    assert evaluate(kind, w).gradient.shape == (5, 3)


def test_grad_check_examples():
    assert grad_check(CostKind(CostVariant.L2), _random_basis(6, 3, 0)) < 1e-5
    assert grad_check(CostKind(CostVariant.L4), _random_basis(8, 4, 0)) < 1e-5
    w = np.column_stack(
        (np.cos(np.radians([0, 35, 80, 130])), np.sin(np.radians([0, 35, 80, 130])))
    )
    assert grad_check(CostKind(CostVariant.COULOMB, 1e-4), w) < 1e-4
    assert grad_check(CostKind(CostVariant.RANDOM_PRIOR, 1e-4), w) < 1e-4


def test_grad_check_step_range():
    with pytest.raises(ValueError):
        grad_check(CostKind(CostVariant.L2), np.eye(2), h=1e-2)


def test_quasi_orth_fixed_points():
    q = random_rotation(4, np.random.default_rng(7))
    assert np.max(np.abs(quasi_orth_update(q) - q)) < 1e-12
    w = _pathological_2d(0.4)
    for prescale in (False, True):
        assert np.max(np.abs(quasi_orth_update(w, prescale) - w)) < 1e-12
    row = np.array([[0.6, 0.8]])
    assert np.max(np.abs(quasi_orth_update(row) - row)) < 1e-15


def test_quasi_orth_spreads_rows():
    w = np.array([[1.0, 0.0], [np.cos(0.2), np.sin(0.2)]])
    g = gram(quasi_orth_update(w))
    assert abs(g[0, 1]) < np.cos(0.2)


def test_quasi_orth_zero_row():
    # a zero row stays zero through the update
    w = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ZeroRow):
        quasi_orth_update(w)
