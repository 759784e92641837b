"""High-dimensional configurations (:mod:`oica.highdim`)
=======================================================

In dimension n, an M times overcomplete basis made of M stacked copies of
one orthonormal basis (the *pathological* configuration) is degenerate:
every row has M − 1 exact copies. For the L2 cost this configuration

- keeps the same cost when any one orthonormal subset is rotated
  (:func:`rotation_invariance_check`);
- is a critical point: rotating a single row by ε changes the cost only at
  order ε² (:func:`critical_point_scan`).

The module also profiles the derivative of the costs with respect to the
angle between two rows, near orthogonality and near alignment
(:func:`gradient_profile`).

.. autoclass:: PathologicalInit

.. autofunction:: pathological_init

.. autofunction:: random_uniform_init

.. autofunction:: check_pathological

.. autofunction:: rotation_deltas

.. autofunction:: rotation_invariance_check

.. autoclass:: CriticalScan

.. autofunction:: critical_point_scan

.. autoclass:: GradientProfile

.. autofunction:: gradient_profile

.. autofunction:: fit_power_law

"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from oica.core import (
    CostKind,
    CostVariant,
    NotPathological,
    as_basis,
    gram,
    project_rows_unit_norm,
    random_rotation,
)
from oica.costs import evaluate, evaluate_value
from oica.asynctools import gather_map

__all__ = [
    "PathologicalInit",
    "pathological_init",
    "random_uniform_init",
    "check_pathological",
    "rotation_deltas",
    "rotation_invariance_check",
    "CriticalScan",
    "critical_point_scan",
    "DEFAULT_EPS_LIST",
    "GradientProfile",
    "gradient_profile",
    "fit_power_law",
    "PowerLawFit",
]

L2 = CostKind(CostVariant.L2)
DEFAULT_EPS_LIST = tuple(np.logspace(-5, -2, 10))
STRUCTURE_TOL = 1e-8


@dataclass(frozen=True)
class PathologicalInit:
    """Parameters of a pathological initialization.

    :param n: dimension
    :param m_tiles: overcompleteness M (number of copies)
    :param noise_sigma: typical norm of the Gaussian perturbation of each
        row before renormalization (σ/√n per entry)
    :param seed: random seed
    """

    n: int
    m_tiles: int
    noise_sigma: float = 0.0
    seed: int = None


def pathological_init(p):
    """M stacked copies of a random rotation of the identity, plus Gaussian
    noise, rows renormalized.

    :param p: parameters
    :type p: :class:`PathologicalInit`
    :return: (M·n)×n basis
    :rtype: :class:`numpy.ndarray`
    """
    if p.n < 2 or p.m_tiles < 1:
        raise ValueError("Need n ≥ 2 and M ≥ 1")
    if p.noise_sigma < 0:
        raise ValueError("noise_sigma must be ≥ 0")
    rng = np.random.default_rng(p.seed)
    q = random_rotation(p.n, rng)
    w = np.tile(q, (p.m_tiles, 1))
    if p.noise_sigma > 0:
        w = w + (p.noise_sigma / np.sqrt(p.n)) * rng.standard_normal(w.shape)
    return project_rows_unit_norm(w)


def random_uniform_init(k, n, seed=None):
    """k rows uniformly distributed on the unit sphere of dimension n
    (normalized standard Gaussian vectors).
    """
    if k < 1 or n < 2:
        raise ValueError("Need k ≥ 1 and n ≥ 2")
    rng = np.random.default_rng(seed)
    return project_rows_unit_norm(rng.standard_normal((k, n)))


def check_pathological(basis, n, m_tiles):
    """Raises :class:`NotPathological` unless ``basis`` is made of
    ``m_tiles`` orthonormal subsets of n rows, each a copy of the first.
    """
    w = as_basis(basis)
    if w.shape != (n * m_tiles, n):
        raise NotPathological(
            "Expected shape {:}, got {:}".format((n * m_tiles, n), w.shape)
        )
    first = w[:n]
    for tile in range(m_tiles):
        subset = w[tile * n : (tile + 1) * n]
        if np.max(np.abs(gram(subset) - np.eye(n))) > STRUCTURE_TOL:
            raise NotPathological("Subset {:d} is not orthonormal".format(tile))
        if np.max(np.abs(subset - first)) > STRUCTURE_TOL:
            raise NotPathological("Subset {:d} is not a copy of the first".format(tile))


def _rotation_trial(args):
    w, n, kind, seed = args
    rng = np.random.default_rng(seed)
    rotated = w.copy()
    rotated[:n] = w[:n] @ random_rotation(n, rng).T
    return abs(evaluate_value(kind, rotated) - evaluate_value(kind, w))


def rotation_deltas(basis, n, m_tiles, trials, kind=L2, seed=None, workers=1):
    """Changes |ΔC| of the cost under random rotations of the first
    orthonormal subset, one per trial. Parameters as in
    :func:`rotation_invariance_check`.
    """
    check_pathological(basis, n, m_tiles)
    w = as_basis(basis)
    seeds = np.random.SeedSequence(seed).spawn(trials)
    deltas = gather_map(_rotation_trial, [(w, n, kind, s) for s in seeds], workers)
    return np.array(deltas, dtype=float)


def rotation_invariance_check(basis, n, m_tiles, trials, kind=L2, seed=None, workers=1):
    """Applies random rotations to the first orthonormal subset only and
    returns the largest change of the cost.

    :param basis: exact (σ = 0) pathological configuration
    :param n: dimension
    :param m_tiles: overcompleteness M
    :param trials: number of random rotations
    :param kind: cost, defaults to L2 (for which the change vanishes)
    :param seed: seed of the rotations; trial i uses the i-th spawned stream
    :param workers: worker processes, defaults to 1
    :raises NotPathological: if the basis is not pathological
    :return: max |ΔC|
    :rtype: float
    """
    deltas = rotation_deltas(basis, n, m_tiles, trials, kind, seed, workers)
    return float(np.max(deltas, initial=0.0))


CriticalScan = namedtuple("CriticalScan", ["eps", "delta", "slope"])
CriticalScan.__doc__ = """Cost changes ``|C(ε) − C(0)|`` and fitted log-log slope."""


def critical_point_scan(
    basis,
    row_index,
    generator_seed,
    eps_list=DEFAULT_EPS_LIST,
    kind=L2,
    shape=None,
):
    """Rotates a single row by ε in the plane it spans with a random
    orthogonal direction, and fits ``log|ΔC|`` against ``log ε``.

    A slope of 2 means the cost has no first-order term (critical point), a
    slope of 1 a non-zero derivative.

    :param basis: basis with unit-norm rows
    :param row_index: row to rotate
    :param generator_seed: seed of the rotation direction
    :param eps_list: rotation angles (radians) in [1e-6, 1e-2]; 0 is allowed
        and gives ΔC = 0
    :param kind: cost, defaults to L2
    :param shape: ``(n, M)`` to require an exact pathological configuration,
        or None to scan any basis
    :raises NotPathological: if ``shape`` is given and not matched
    :rtype: :class:`CriticalScan`
    """
    w = as_basis(basis)
    if shape is not None:
        check_pathological(w, *shape)
    eps = np.asarray(eps_list, dtype=float)
    if np.any(eps < 0) or np.any(eps > 1e-2):
        raise ValueError("Rotation angles must be in [0, 1e-2]")
    rng = np.random.default_rng(generator_seed)
    u = w[row_index]
    v = rng.standard_normal(w.shape[1])
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    c0 = evaluate_value(kind, w)
    deltas = np.empty(eps.size)
    for i, e in enumerate(eps):
        perturbed = w.copy()
        perturbed[row_index] = np.cos(e) * u + np.sin(e) * v
        deltas[i] = abs(evaluate_value(kind, perturbed) - c0)
    usable = (eps > 0) & (deltas > 0)
    if np.count_nonzero(usable) >= 2:
        slope = float(np.polyfit(np.log(eps[usable]), np.log(deltas[usable]), 1)[0])
    else:
        slope = float("nan")
    return CriticalScan(eps, deltas, slope)


GradientProfile = namedtuple("GradientProfile", ["cos_theta", "gradient"])
GradientProfile.__doc__ = """Angular derivative ``|dC/dθ|`` of a two-row cost against cos θ."""

PowerLawFit = namedtuple("PowerLawFit", ["prefactor", "exponent", "r2"])


def _two_row_gradient(kind, theta):
    """dC/dθ for the rows (1, 0) and (cos θ, sin θ), by the chain rule."""
    w = np.array([[1.0, 0.0], [np.cos(theta), np.sin(theta)]])
    grad_w = evaluate(kind, w).gradient
    return grad_w[1] @ np.array([-np.sin(theta), np.cos(theta)])


def gradient_profile(kind, region, samples=200, delta=1e-3):
    """Tabulates ``|dC/dθ|`` for two unit rows in the plane.

    :param kind: cost
    :type kind: :class:`~oica.core.basis.CostKind`
    :param region: "near_zero" (cos θ in [0, 0.1]) or "near_one"
        (cos θ in [0.9, 1 − δ])
    :type region: str
    :param samples: number of points
    :param delta: distance to cos θ = 1 kept in the near_one region; it is
        raised to 100 ε for the regularized costs
    :rtype: :class:`GradientProfile`
    """
    if region == "near_zero":
        cos_theta = np.linspace(0.0, 0.1, samples)
    elif region == "near_one":
        if kind.variant.singular:
            delta = max(delta, 100.0 * kind.eps)
        cos_theta = np.linspace(0.9, 1.0 - delta, samples)
    else:
        raise ValueError("region must be near_zero or near_one")
    theta = np.arccos(cos_theta)
    gradient = np.abs([_two_row_gradient(kind, t) for t in theta])
    return GradientProfile(cos_theta, gradient)


def fit_power_law(profile):
    """Least-squares fit of ``|dC/dθ| = c (cos θ)^p`` in log-log coordinates,
    on the points where both are positive.

    :rtype: PowerLawFit(prefactor, exponent, r2)
    """
    x = np.asarray(profile.cos_theta)
    y = np.asarray(profile.gradient)
    usable = (x > 0) & (y > 0)
    lx, ly = np.log(x[usable]), np.log(y[usable])
    p, logc = np.polyfit(lx, ly, 1)
    residual = ly - (p * lx + logc)
    total = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(residual ** 2) / total if total > 0 else 1.0
    return PowerLawFit(float(np.exp(logc)), float(p), float(r2))
