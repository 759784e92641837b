"""ICA objective (:mod:`oica.objective`)
=======================================

The unconstrained overcomplete ICA objective

.. math::

   C(W) + \\lambda \\frac{1}{m} \\sum_{i=1}^{m} \\sum_{j=1}^{k} \\log\\cosh(W_j x^{(i)})

where C is a degeneracy-control cost from :mod:`oica.costs`. The sparsity
term is averaged over the m samples so that λ does not depend on the
number of samples.

.. autofunction:: sparsity_prior

.. autoclass:: IcaObjective
   :members:

.. autofunction:: total_objective

.. autofunction:: reconstruction_error

"""

import numpy as np

from oica.core import ShapeMismatch, as_basis
from oica.costs import CostEval, evaluate

__all__ = [
    "log_cosh",
    "sparsity_prior",
    "IcaObjective",
    "total_objective",
    "reconstruction_error",
]


def log_cosh(x):
    """Overflow-free ``log(cosh(x))``."""
    return np.logaddexp(x, -x) - np.log(2.0)


def _check_shapes(w, data):
    if data.ndim != 2 or data.shape[0] != w.shape[1]:
        raise ShapeMismatch(
            "Data of shape {:} does not match a basis of dimension {:d}".format(
                data.shape, w.shape[1]
            )
        )


def sparsity_prior(basis, data, chunk_size=None):
    """Mean over samples of ``Σ_j log cosh(W_j x)`` and its gradient
    ``(1/m) Σ_x tanh(W x) xᵀ``.

    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :param data: n×m data, one sample per column
    :type data: :class:`numpy.ndarray`
    :param chunk_size: number of samples processed at once, defaults to all
    :type chunk_size: int, optional
    :raises ShapeMismatch: if the data dimension differs from the basis one
    :rtype: :class:`~oica.costs.CostEval`
    """
    w = as_basis(basis)
    data = np.asarray(data, dtype=float)
    _check_shapes(w, data)
    m = data.shape[1]
    value = 0.0
    gradient = np.zeros_like(w)
    if m == 0:
        return CostEval(value, gradient)
    step = m if chunk_size is None else max(int(chunk_size), 1)
    for start in range(0, m, step):
        x = data[:, start : start + step]
        s = w @ x
        value += float(np.sum(log_cosh(s)))
        gradient += np.tanh(s) @ x.T
    return CostEval(value / m, gradient / m)


class IcaObjective:
    """Degeneracy cost plus λ times the sparsity prior on some data.
    Instances are callables returning a :class:`~oica.costs.CostEval`, and
    hold no mutable state (they can be shared between threads).

    :param cost_kind: degeneracy-control cost
    :type cost_kind: :class:`~oica.core.basis.CostKind`
    :param lam: sparsity weight λ ≥ 0
    :type lam: float
    :param data: n×m whitened data, or None for the pure degeneracy cost
    :type data: :class:`numpy.ndarray`, optional
    :param chunk_size: samples per chunk for the sparsity term
    :type chunk_size: int, optional
    """

    def __init__(self, cost_kind, lam=0.0, data=None, chunk_size=None):
        if not lam >= 0:
            raise ValueError("The sparsity weight must be non-negative")
        self.cost_kind = cost_kind
        self.lam = float(lam)
        self.data = None if data is None else np.asarray(data, dtype=float)
        self.chunk_size = chunk_size

    @property
    def dims(self):
        return None if self.data is None else self.data.shape[0]

    def __call__(self, basis):
        return total_objective(basis, self)

    def __repr__(self):
        m = 0 if self.data is None else self.data.shape[1]
        return "IcaObjective(cost={:}, lambda={:g}, samples={:d})".format(
            self.cost_kind, self.lam, m
        )


def total_objective(basis, obj):
    """Degeneracy cost + λ · sparsity prior.

    With λ = 0, without data or with zero samples, this is exactly the
    degeneracy cost.

    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :param obj: the objective
    :type obj: :class:`IcaObjective`
    :rtype: :class:`~oica.costs.CostEval`
    """
    w = as_basis(basis)
    degeneracy = evaluate(obj.cost_kind, w)
    if obj.data is None:
        return degeneracy
    _check_shapes(w, obj.data)
    if obj.lam == 0.0 or obj.data.shape[1] == 0:
        return degeneracy
    prior = sparsity_prior(w, obj.data, obj.chunk_size)
    return CostEval(
        degeneracy.value + obj.lam * prior.value,
        degeneracy.gradient + obj.lam * prior.gradient,
    )


def reconstruction_error(basis, data):
    """Mean over samples of ``|x − Wᵀ W x|²``."""
    w = as_basis(basis)
    data = np.asarray(data, dtype=float)
    _check_shapes(w, data)
    if data.shape[1] == 0:
        return 0.0
    residual = data - w.T @ (w @ data)
    return float(np.mean(np.sum(residual * residual, axis=0)))
