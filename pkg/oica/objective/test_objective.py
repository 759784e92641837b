import numpy as np
import pytest

from oica.core import CostKind, CostVariant, ShapeMismatch, project_rows_unit_norm
from oica.costs import evaluate
from oica.objective import (
    IcaObjective,
    log_cosh,
    reconstruction_error,
    sparsity_prior,
    total_objective,
)

L2 = CostKind(CostVariant.L2)


def _problem(seed=0, k=4, n=2, m=10):
    rng = np.random.default_rng(seed)
    w = project_rows_unit_norm(rng.standard_normal((k, n)))
    x = rng.standard_normal((n, m))
    return w, x


def test_log_cosh():
    assert log_cosh(1.0) == pytest.approx(np.log(np.cosh(1.0)))
    assert log_cosh(0.0) == 0.0
    assert log_cosh(1000.0) == pytest.approx(1000.0 - np.log(2.0))


def test_sparsity_prior_examples():
    assert sparsity_prior([[1.0, 0.0]], [[1.0], [0.0]]).value == pytest.approx(
        0.4338, abs=1e-4
    )
    orthogonal = sparsity_prior([[0.0, 1.0]], [[1.0, -2.0, 3.0], [0.0, 0.0, 0.0]])
    assert orthogonal.value == 0.0
    assert np.array_equal(orthogonal.gradient, [[0.0, 0.0]])


def test_sparsity_prior_gradient():
    w, x = _problem()
    analytic = sparsity_prior(w, x).gradient
    h = 1e-6
    numeric = np.empty_like(w)
    for index in np.ndindex(*w.shape):
        plus, minus = w.copy(), w.copy()
        plus[index] += h
        minus[index] -= h
        numeric[index] = (
            sparsity_prior(plus, x).value - sparsity_prior(minus, x).value
        ) / (2 * h)
    assert np.max(np.abs(analytic - numeric) / np.maximum(np.abs(analytic), 1e-8)) < 1e-5


def test_sparsity_prior_chunks_and_permutation():
    w, x = _problem(seed=3, k=6, n=3, m=101)
    whole = sparsity_prior(w, x)
    chunked = sparsity_prior(w, x, chunk_size=7)
    assert chunked.value == pytest.approx(whole.value, abs=1e-10)
    assert np.max(np.abs(chunked.gradient - whole.gradient)) < 1e-10
    permuted = sparsity_prior(w, x[:, np.random.default_rng(0).permutation(101)])
    assert permuted.value == pytest.approx(whole.value, abs=1e-12)


def test_shape_mismatch():
    w, x = _problem()
    with pytest.raises(ShapeMismatch):
        sparsity_prior(w, x[:1])
    with pytest.raises(ShapeMismatch):
        total_objective(w, IcaObjective(L2, 0.5, np.ones((3, 4))))


def test_total_objective():
    w, x = _problem()
    degeneracy = evaluate(L2, w)

    zero_lambda = IcaObjective(L2, 0.0, x)(w)
    assert zero_lambda.value == degeneracy.value
    assert np.array_equal(zero_lambda.gradient, degeneracy.gradient)

    empty = IcaObjective(L2, 0.5, np.empty((2, 0)))(w)
    assert empty.value == degeneracy.value

    total = total_objective(w, IcaObjective(L2, 0.5, x))
    prior = sparsity_prior(w, x)
    assert total.value == pytest.approx(degeneracy.value + 0.5 * prior.value, abs=1e-12)
    assert (
        np.max(np.abs(total.gradient - degeneracy.gradient - 0.5 * prior.gradient))
        < 1e-12
    )


def test_linear_in_lambda():
    w, x = _problem(seed=1)
    values = [IcaObjective(L2, lam, x)(w).value for lam in (0.0, 1.0, 2.0)]
    assert values[2] - values[1] == pytest.approx(values[1] - values[0], rel=1e-12)


def test_negative_lambda():
    with pytest.raises(ValueError):
        IcaObjective(L2, -1.0)


def test_reconstruction_error():
    x = np.random.default_rng(0).standard_normal((3, 20))
    assert reconstruction_error(np.eye(3), x) == pytest.approx(0.0, abs=1e-25)
    assert reconstruction_error(np.eye(3), np.empty((3, 0))) == 0.0
    assert reconstruction_error([[1.0, 0.0, 0.0]], x) == pytest.approx(
        np.mean(x[1] ** 2 + x[2] ** 2)
    )
