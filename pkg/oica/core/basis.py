"""Basis geometry (:mod:`oica.core.basis`)
==========================================

A basis is a k×n :class:`numpy.ndarray` whose rows are the k basis
elements in dimension n (k may exceed n). Its Gram matrix ``W @ W.T`` holds
the cosines of the pairwise angles when the rows are unit-norm.

.. autofunction:: as_basis

.. autofunction:: gram

.. autofunction:: pairwise_angles

.. autofunction:: min_pairwise_angle

.. autoclass:: AngleStats
   :members:

.. autofunction:: angle_stats

.. autofunction:: project_rows_unit_norm

.. autofunction:: tangent_component

.. autofunction:: random_rotation

.. autoclass:: CostVariant

.. autoclass:: CostKind
   :members:

"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from oica.core.errors import InvalidEpsilon, ShapeMismatch, ZeroRow

__all__ = [
    "as_basis",
    "gram",
    "pairwise_angles",
    "min_pairwise_angle",
    "AngleStats",
    "angle_stats",
    "project_rows_unit_norm",
    "tangent_component",
    "random_rotation",
    "CostVariant",
    "CostKind",
    "DEFAULT_EPS",
]

ZERO_ROW_NORM = 1e-14
DEFAULT_EPS = 1e-6


def as_basis(w, min_dims=1):
    """Returns w as a 2D float64 array, raising :class:`ShapeMismatch`
    for anything that is not a non-empty matrix.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w.reshape(1, -1)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < min_dims:
        raise ShapeMismatch("Expected a k×n basis, got shape {:}".format(w.shape))
    return w


def gram(basis):
    """Gram matrix ``W Wᵀ`` of the basis rows, exactly symmetric.

    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :return: k×k Gram matrix
    :rtype: :class:`numpy.ndarray`
    """
    w = as_basis(basis)
    g = w @ w.T
    return 0.5 * (g + g.T)


def pairwise_angles(basis, fold=False):
    """Sorted pairwise angles in degrees, one per unordered pair i<j.

    :param basis: k×n basis with unit-norm rows
    :type basis: :class:`numpy.ndarray`
    :param fold: if True, angles θ > 90° are replaced by 180° − θ (the angle
        between the lines spanned by the rows), defaults to False
    :type fold: bool, optional
    :return: sorted angles, length k(k−1)/2, in [0, 180] (or [0, 90] if folded)
    :rtype: :class:`numpy.ndarray`
    """
    g = gram(basis)
    iu = np.triu_indices(g.shape[0], 1)
    angles = np.degrees(np.arccos(np.clip(g[iu], -1.0, 1.0)))
    if fold:
        angles = np.minimum(angles, 180.0 - angles)
    return np.sort(angles)


def min_pairwise_angle(basis):
    """Smallest acute angle (degrees) between two basis rows, NaN if k = 1.

    A row and its negative are equally degenerate for every cost, hence the
    acute angle.
    """
    angles = pairwise_angles(basis, fold=True)
    if angles.size == 0:
        return float("nan")
    return float(angles[0])


@dataclass
class AngleStats:
    """Distribution of acute pairwise angles of a basis.

    .. attribute:: angles

       sorted acute pairwise angles in degrees

    .. attribute:: bin_edges

       histogram bin edges (1° bins over [0°, 90°])

    .. attribute:: counts

       histogram counts
    """

    angles: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    min: float
    median: float
    mean: float
    std: float
    p1: float

    def summary(self):
        """Summary statistics as a JSON-friendly dictionary."""
        return {
            "num_pairs": int(self.angles.size),
            "min_deg": self.min,
            "median_deg": self.median,
            "mean_deg": self.mean,
            "std_deg": self.std,
            "p1_deg": self.p1,
        }


def angle_stats(basis, bin_width=1.0):
    """Histogram and summary statistics of the acute pairwise angles.

    :param basis: k×n basis with unit-norm rows, k ≥ 2
    :type basis: :class:`numpy.ndarray`
    :param bin_width: histogram bin width in degrees, defaults to 1
    :type bin_width: float, optional
    :rtype: :class:`AngleStats`
    """
    angles = pairwise_angles(basis, fold=True)
    if angles.size == 0:
        raise ShapeMismatch("Angle statistics need at least two basis rows")
    edges = np.arange(0.0, 90.0 + bin_width / 2, bin_width)
    counts, edges = np.histogram(angles, bins=edges)
    return AngleStats(
        angles=angles,
        bin_edges=edges,
        counts=counts,
        min=float(angles[0]),
        median=float(np.median(angles)),
        mean=float(np.mean(angles)),
        std=float(np.std(angles)),
        p1=float(np.percentile(angles, 1.0)),
    )


def project_rows_unit_norm(basis):
    """Norm-ball projection: divides every row by its Euclidean norm.

    :param basis: k×n basis
    :type basis: :class:`numpy.ndarray`
    :raises ZeroRow: if a row norm is below 1e-14
    :return: new basis with unit-norm rows
    :rtype: :class:`numpy.ndarray`
    """
    w = as_basis(basis)
    norms = np.sqrt(np.einsum("ij,ij->i", w, w))
    bad = np.flatnonzero(~(norms > ZERO_ROW_NORM))
    if bad.size > 0:
        raise ZeroRow(bad)
    return w / norms[:, np.newaxis]


def tangent_component(basis, direction):
    """Removes from every row of ``direction`` its component along the
    corresponding (unit) basis row, i.e. projects a gradient on the tangent
    space of the product of spheres.
    """
    radial = np.einsum("ij,ij->i", direction, basis)
    return direction - radial[:, np.newaxis] * basis


def random_rotation(n, rng):
    """Haar-distributed random rotation in SO(n).

    Obtained from the QR decomposition of a Gaussian matrix, with the signs
    of R's diagonal folded into Q and the determinant fixed to +1.

    :param n: dimension
    :type n: int
    :param rng: random generator
    :type rng: :class:`numpy.random.Generator`
    :rtype: :class:`numpy.ndarray`
    """
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class CostVariant(Enum):
    """Degeneracy-control mechanisms available as costs."""

    L2 = "l2"
    L4 = "l4"
    COULOMB = "coulomb"
    RANDOM_PRIOR = "rand_prior"

    @property
    def singular(self):
        """True for the costs which diverge for parallel rows."""
        return self in (CostVariant.COULOMB, CostVariant.RANDOM_PRIOR)


@dataclass(frozen=True)
class CostKind:
    """A degeneracy-control cost and its regularization constant.

    :param variant: the cost
    :type variant: :class:`CostVariant`
    :param eps: regularization of the singular costs, ``1 - cos²θ`` is
        replaced by ``1 + eps - cos²θ``; unused by L2 and L4
    :type eps: float, optional
    """

    variant: CostVariant
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        if self.variant.singular and not self.eps > 0:
            raise InvalidEpsilon(
                "{:} cost needs eps > 0, got {:}".format(self.variant.value, self.eps)
            )

    @classmethod
    def parse(cls, name, eps=DEFAULT_EPS):
        """Builds a CostKind from its command-line name
        ("l2", "l4", "coulomb" or "rand_prior").
        """
        try:
            variant = CostVariant(name.lower())
        except ValueError:
            choices = ", ".join(v.value for v in CostVariant)
            raise ValueError(
                "Unknown cost {:}. Choose one of {:}".format(name, choices)
            ) from None
        return cls(variant, eps)

    @property
    def name(self):
        return self.variant.value

    def __str__(self):
        if self.variant.singular:
            return "{:}(eps={:g})".format(self.name, self.eps)
        return self.name
