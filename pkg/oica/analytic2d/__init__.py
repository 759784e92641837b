"""Two-dimensional oracle (:mod:`oica.analytic2d`)
=================================================

Four unit vectors in the plane at the angles ``0, θ1, θ2, θ2 + θ3``. With
``θ1 = θ3 = π/2`` the basis is two orthonormal pairs, and varying θ2 moves
along a path which contains the degenerate configuration ``θ2 = 0``.

Along this path the L2 cost is constant (a ring of critical points with a
flat Hessian direction), while the L4 cost ``3 + cos 4θ2`` turns the
degenerate points ``θ2 = nπ/2`` into saddles and has its minima at
``θ2 = (2n+1)π/4``. This module gives the closed forms of the cost, its
gradient, Hessian and Hessian eigenvalues along the path, and the numerical
counterparts computed through :mod:`oica.costs`, which the closed forms are
checked against.

.. autoclass:: Config2D

.. autofunction:: to_basis

.. autofunction:: path_cost

.. autofunction:: path_gradient

.. autofunction:: path_hessian

.. autofunction:: path_hessian_eigs

.. autofunction:: theta_cost

.. autofunction:: theta_gradient

.. autofunction:: fd_theta_gradient

.. autofunction:: fd_theta_hessian

.. autofunction:: check_path

"""

from collections import namedtuple

import numpy as np

from oica.core import CostKind, CostVariant
from oica.costs import evaluate

__all__ = [
    "Config2D",
    "to_basis",
    "path_config",
    "path_cost",
    "path_gradient",
    "path_hessian",
    "path_hessian_eigs",
    "theta_cost",
    "theta_gradient",
    "fd_theta_gradient",
    "fd_theta_hessian",
    "check_path",
    "PathCheck",
    "theta2_grid",
]

Config2D = namedtuple("Config2D", ["theta1", "theta2", "theta3"])
Config2D.__doc__ = """Angles (radians) of the four vectors ``0, θ1, θ2, θ2 + θ3``."""


def _kind(kind):
    if isinstance(kind, CostKind):
        variant = kind.variant
    else:
        variant = CostVariant(kind) if isinstance(kind, str) else kind
    if variant not in (CostVariant.L2, CostVariant.L4):
        raise ValueError("Closed forms exist for the L2 and L4 costs only")
    return variant


def to_basis(cfg):
    """4×2 basis with rows at angles ``0, θ1, θ2, θ2 + θ3``.

    :param cfg: configuration
    :type cfg: :class:`Config2D` or sequence of three angles
    :rtype: :class:`numpy.ndarray`
    """
    t1, t2, t3 = cfg
    angles = np.array([0.0, t1, t2, t2 + t3])
    return np.column_stack((np.cos(angles), np.sin(angles)))


def path_config(theta2):
    """Point of the path ``θ1 = θ3 = π/2``."""
    return Config2D(np.pi / 2, theta2, np.pi / 2)


def path_cost(kind, theta2):
    """Closed-form cost along the path: 4 for L2, ``3 + cos 4θ2`` for L4."""
    if _kind(kind) is CostVariant.L2:
        return 4.0
    return 3.0 + np.cos(4.0 * theta2)


def path_gradient(kind, theta2):
    """Closed-form gradient ``(∂C/∂θ1, ∂C/∂θ2, ∂C/∂θ3)`` along the path."""
    if _kind(kind) is CostVariant.L2:
        return np.zeros(3)
    s = np.sin(4.0 * theta2)
    return np.array([2.0 * s, -4.0 * s, -2.0 * s])


def path_hessian(kind, theta2):
    """Closed-form 3×3 Hessian in (θ1, θ2, θ3) along the path."""
    c2 = np.cos(2.0 * theta2)
    if _kind(kind) is CostVariant.L2:
        return np.array(
            [
                [4.0, 0.0, 4.0 * c2],
                [0.0, 0.0, 0.0],
                [4.0 * c2, 0.0, 4.0],
            ]
        )
    c4 = np.cos(4.0 * theta2)
    return np.array(
        [
            [-8.0 * c4, 8.0 * c4, 4.0 * (c2 + c4)],
            [8.0 * c4, -16.0 * c4, -8.0 * c4],
            [4.0 * (c2 + c4), -8.0 * c4, -8.0 * c4],
        ]
    )


def path_hessian_eigs(kind, theta2):
    """Closed-form Hessian eigenvalues along the path, ascending.

    L2: ``0, 8 sin²θ2, 8 cos²θ2``.
    L4: ``4 (cos 2θ2 − cos 4θ2)`` (eigenvector (1, 0, 1)) and
    ``−2 cos 2θ2 − 14 cos 4θ2 ± √2 √(34 − 2 cos 2θ2 + cos 4θ2 − 2 cos 6θ2 + 33 cos 8θ2)``.
    """
    if _kind(kind) is CostVariant.L2:
        eigs = [0.0, 8.0 * np.sin(theta2) ** 2, 8.0 * np.cos(theta2) ** 2]
    else:
        c2, c4 = np.cos(2.0 * theta2), np.cos(4.0 * theta2)
        c6, c8 = np.cos(6.0 * theta2), np.cos(8.0 * theta2)
        # the radicand is 2((c2 - c4)² + 32 c4²) ≥ 0, up to rounding
        root = np.sqrt(2.0) * np.sqrt(max(34.0 - 2.0 * c2 + c4 - 2.0 * c6 + 33.0 * c8, 0.0))
        center = -2.0 * c2 - 14.0 * c4
        eigs = [4.0 * (c2 - c4), center - root, center + root]
    return np.sort(np.array(eigs))


def theta_cost(kind, cfg):
    """Numerical cost of :func:`to_basis` (cfg), through :mod:`oica.costs`."""
    return evaluate(CostKind(_kind(kind)), to_basis(cfg)).value


def theta_gradient(kind, cfg):
    """Gradient in θ coordinates from the analytic W gradient (chain rule)."""
    t1, t2, t3 = cfg
    grad_w = evaluate(CostKind(_kind(kind)), to_basis(cfg)).gradient

    def tangent(a):
        return np.array([-np.sin(a), np.cos(a)])

    d1 = grad_w[1] @ tangent(t1)
    d2 = grad_w[2] @ tangent(t2)
    d3 = grad_w[3] @ tangent(t2 + t3)
    return np.array([d1, d2 + d3, d3])


def fd_theta_gradient(kind, cfg, h=1e-5):
    """Central finite-difference gradient of :func:`theta_cost`."""
    x = np.array(cfg, dtype=float)
    grad = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        grad[i] = (theta_cost(kind, x + e) - theta_cost(kind, x - e)) / (2.0 * h)
    return grad


def fd_theta_hessian(kind, cfg, h=1e-4):
    """Second-order central finite-difference Hessian of :func:`theta_cost`."""
    x = np.array(cfg, dtype=float)
    f0 = theta_cost(kind, x)
    hess = np.empty((3, 3))
    eye = np.eye(3) * h
    for i in range(3):
        hess[i, i] = (
            theta_cost(kind, x + eye[i]) - 2.0 * f0 + theta_cost(kind, x - eye[i])
        ) / (h * h)
        for j in range(i + 1, 3):
            hess[i, j] = hess[j, i] = (
                theta_cost(kind, x + eye[i] + eye[j])
                - theta_cost(kind, x + eye[i] - eye[j])
                - theta_cost(kind, x - eye[i] + eye[j])
                + theta_cost(kind, x - eye[i] - eye[j])
            ) / (4.0 * h * h)
    return hess


PathCheck = namedtuple(
    "PathCheck",
    [
        "theta2",
        "cost_closed",
        "cost_numeric",
        "max_grad_err",
        "max_hess_err",
        "max_eig_err",
        "max_fd_eig_err",
    ],
)
PathCheck.__doc__ = """Agreement of closed forms and numerics at one point of the path.

``max_grad_err``: finite-difference gradient vs :func:`path_gradient`;
``max_hess_err``: finite-difference Hessian vs :func:`path_hessian`;
``max_eig_err``: eigenvalues of :func:`path_hessian` vs
:func:`path_hessian_eigs`; ``max_fd_eig_err``: eigenvalues of the
finite-difference Hessian vs :func:`path_hessian_eigs`.
"""


def check_path(kind, theta2, cost_offset=0.0):
    """Compares closed forms and numerics at ``θ2`` on the path.

    :param kind: "l2" or "l4"
    :param theta2: position on the path, in radians
    :param cost_offset: error added to the closed-form cost (negative
        control of the checks)
    :rtype: :class:`PathCheck`
    """
    cfg = path_config(theta2)
    closed_eigs = path_hessian_eigs(kind, theta2)
    fd_hess = fd_theta_hessian(kind, cfg)
    return PathCheck(
        theta2=float(theta2),
        cost_closed=float(path_cost(kind, theta2)) + cost_offset,
        cost_numeric=theta_cost(kind, cfg),
        max_grad_err=float(
            np.max(np.abs(fd_theta_gradient(kind, cfg) - path_gradient(kind, theta2)))
        ),
        max_hess_err=float(np.max(np.abs(fd_hess - path_hessian(kind, theta2)))),
        max_eig_err=float(
            np.max(np.abs(np.linalg.eigvalsh(path_hessian(kind, theta2)) - closed_eigs))
        ),
        max_fd_eig_err=float(
            np.max(np.abs(np.linalg.eigvalsh(0.5 * (fd_hess + fd_hess.T)) - closed_eigs))
        ),
    )


def theta2_grid(points):
    """``points`` equally spaced values of θ2 in [0, 2π)."""
    return np.linspace(0.0, 2.0 * np.pi, int(points), endpoint=False)
