"""Degeneracy-control costs (:mod:`oica.costs`)
===============================================

Costs penalizing the co-alignment of basis rows, written on the Gram matrix
``G = W Wᵀ`` of a basis W with unit-norm rows:

- L2: ``Σ_ij (δ_ij − G_ij)²``, summed over all ordered pairs, diagonal
  included;
- L4: ``Σ_ij (δ_ij − G_ij)⁴``, same convention;
- Coulomb: ``Σ_{i≠j} 1/√(1 + ε − G_ij²)``;
- random prior: ``−Σ_{i≠j} log(1 + ε − G_ij²)``.

Every cost of the form ``Σ_ij f(G_ij)`` has the gradient ``2 F W`` with
``F_ij = f'(G_ij)``, taken with respect to the raw entries of W (the unit
norm constraint is handled by the optimizer).

The module also implements the quasi-orthogonality update, which is not a
cost but an alternative degeneracy control.

.. autoclass:: CostEval

.. autofunction:: cost_l2

.. autofunction:: cost_l4

.. autofunction:: cost_coulomb

.. autofunction:: cost_random_prior

.. autofunction:: evaluate

.. autofunction:: quasi_orth_update

.. autofunction:: grad_check

"""

from collections import namedtuple

import numpy as np

from oica.core import (
    CostKind,
    CostVariant,
    InvalidEpsilon,
    as_basis,
    gram,
    project_rows_unit_norm,
)

__all__ = [
    "CostEval",
    "cost_l2",
    "cost_l4",
    "cost_coulomb",
    "cost_random_prior",
    "evaluate",
    "evaluate_value",
    "quasi_orth_update",
    "grad_check",
]

CostEval = namedtuple("CostEval", ["value", "gradient"])
CostEval.__doc__ = """Value of a cost and its gradient with respect to W (same shape as W)."""


def _check_eps(eps):
    if not eps > 0:
        raise InvalidEpsilon("eps must be positive, got {:}".format(eps))


def cost_l2(basis):
    """L2 cost ``Σ_ij (δ_ij − cos θ_ij)²`` and its gradient ``−4 (I − G) W``.

    :param basis: k×n basis with unit-norm rows
    :type basis: :class:`numpy.ndarray`
    :rtype: :class:`CostEval`
    """
    w = as_basis(basis)
    r = np.eye(w.shape[0]) - gram(w)
    return CostEval(float(np.sum(r * r)), -4.0 * r @ w)


def cost_l4(basis):
    """L4 cost ``Σ_ij (δ_ij − cos θ_ij)⁴`` and its gradient ``−8 (I − G)^∘3 W``.

    :param basis: k×n basis with unit-norm rows
    :type basis: :class:`numpy.ndarray`
    :rtype: :class:`CostEval`
    """
    w = as_basis(basis)
    r = np.eye(w.shape[0]) - gram(w)
    r2 = r * r
    return CostEval(float(np.sum(r2 * r2)), -8.0 * (r2 * r) @ w)


def _regularized_gap(w, eps):
    """Returns the Gram matrix and ``1 + eps − G²``, with the
    diagonal set to 1 (it is masked out by the callers).
    """
    g = gram(w)
    gap = 1.0 + eps - g * g
    np.fill_diagonal(gap, 1.0)
    return g, gap


def cost_coulomb(basis, eps):
    """Coulomb cost ``Σ_{i≠j} 1/√(1 + ε − cos²θ_ij)``.

    :param basis: k×n basis with unit-norm rows
    :type basis: :class:`numpy.ndarray`
    :param eps: regularization constant, > 0
    :type eps: float
    :raises InvalidEpsilon: if eps ≤ 0
    :rtype: :class:`CostEval`
    """
    _check_eps(eps)
    w = as_basis(basis)
    g, gap = _regularized_gap(w, eps)
    inv_sqrt = 1.0 / np.sqrt(gap)
    np.fill_diagonal(inv_sqrt, 0.0)
    # f'(x) = x (1 + eps - x²)^(-3/2)
    fprime = g * inv_sqrt / gap
    return CostEval(float(np.sum(inv_sqrt)), 2.0 * fprime @ w)


def cost_random_prior(basis, eps):
    """Random-prior cost ``−Σ_{i≠j} log(1 + ε − cos²θ_ij)``, the negative
    log-density of pairwise angles between random vectors (up to constants).

    :param basis: k×n basis with unit-norm rows
    :type basis: :class:`numpy.ndarray`
    :param eps: regularization constant, > 0
    :type eps: float
    :raises InvalidEpsilon: if eps ≤ 0
    :rtype: :class:`CostEval`
    """
    _check_eps(eps)
    w = as_basis(basis)
    g, gap = _regularized_gap(w, eps)
    log_gap = np.log(gap)
    np.fill_diagonal(log_gap, 0.0)
    fprime = 2.0 * g / gap
    np.fill_diagonal(fprime, 0.0)
    return CostEval(float(-np.sum(log_gap)), 2.0 * fprime @ w)


def evaluate(kind, basis):
    """Evaluates the cost described by ``kind``.

    :param kind: the cost
    :type kind: :class:`~oica.core.basis.CostKind`
    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :rtype: :class:`CostEval`
    """
    if kind.variant is CostVariant.L2:
        return cost_l2(basis)
    elif kind.variant is CostVariant.L4:
        return cost_l4(basis)
    elif kind.variant is CostVariant.COULOMB:
        return cost_coulomb(basis, kind.eps)
    elif kind.variant is CostVariant.RANDOM_PRIOR:
        return cost_random_prior(basis, kind.eps)
    raise ValueError("Unknown cost {:}".format(kind))


def evaluate_value(kind, basis):
    """Cost value only."""
    return evaluate(kind, basis).value


def quasi_orth_update(basis, prescale=False):
    """One step of the quasi-orthogonality update
    ``W ← (3/2) W − (1/2) W Wᵀ W``, followed by the norm-ball projection.

    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :param prescale: divide W by the square root of the spectral norm of
        ``W Wᵀ`` before the update, as in the original symmetric
        orthogonalization scheme, defaults to False
    :type prescale: bool, optional
    :raises ZeroRow: if a row of the update vanishes
    :rtype: :class:`numpy.ndarray`
    """
    w = as_basis(basis)
    if prescale:
        # sqrt of the spectral norm of W Wᵀ is the largest singular value of W
        w = w / np.linalg.norm(w, ord=2)
    return project_rows_unit_norm(1.5 * w - 0.5 * w @ (w.T @ w))


def grad_check(cost, basis, h=1e-5):
    """Compares the analytic gradient of a cost with central finite
    differences of its value, entry by entry.

    :param cost: the cost
    :type cost: :class:`~oica.core.basis.CostKind`
    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :param h: finite difference step, in [1e-7, 1e-3], defaults to 1e-5
    :type h: float, optional
    :return: maximum relative error, with denominator
        ``max(|analytic|, |numeric|, 1e-8)``
    :rtype: float
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("Finite difference step must be in [1e-7, 1e-3]")
    w = as_basis(basis).copy()
    analytic = evaluate(cost, w).gradient
    numeric = np.empty_like(w)
    for index in np.ndindex(*w.shape):
        saved = w[index]
        w[index] = saved + h
        plus = evaluate_value(cost, w)
        w[index] = saved - h
        minus = evaluate_value(cost, w)
        w[index] = saved
        numeric[index] = (plus - minus) / (2.0 * h)
    denominator = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denominator))
