"""Gabor fits (:mod:`oica.gabor`)
===============================

Learned basis elements are characterized by the Gabor kernel which fits
them best. A kernel is

.. math::

   A \\exp\\left(-\\frac{u^2}{2\\sigma_\\parallel^2}
   - \\frac{v^2}{2\\sigma_\\perp^2}\\right) \\cos(2\\pi f u + \\psi)

where (u, v) are the pixel offsets from the center, rotated by φ, with u
along the oscillation axis. Pixel (row y, column x) has coordinates (x, y).

:func:`fit_gabor` minimizes the normalized mean-squared error between the
unit-norm patch and the unit-norm kernel in three stages:

1. the envelope center is the intensity centroid of the absolute value of
   the patch, blurred at several widths;
2. for every center, a grid of rotations and frequencies is screened, and
   the best candidates are refined in (rotation, frequency);
3. the best few candidates are re-optimized in all nonlinear parameters.

Amplitude and phase enter the kernel linearly through its even and odd
parts, so they are solved by linear least squares at every evaluation.
The nonlinear parameters are refined with
:func:`scipy.optimize.least_squares` (trust region reflective, box bounds)
on the residual left by that projection.

.. autoclass:: GaborParams

.. autofunction:: gabor_kernel

.. autofunction:: normalized_mse

.. autoclass:: GaborFitConfig

.. autofunction:: fit_gabor

.. autoclass:: BasisFit
   :members:

.. autofunction:: fit_basis

"""

import heapq
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter
from scipy.optimize import least_squares
from progressbar import ProgressBar
from fluiddyn.util.terminal_colors import cprint

from oica.core import ConstantPatch, FitDiverged, ShapeMismatch, write_table_csv
from oica.asynctools import gather_map, worker_count

__all__ = [
    "GaborParams",
    "gabor_kernel",
    "normalized_mse",
    "GaborFitConfig",
    "fit_gabor",
    "BasisFit",
    "fit_basis",
    "FIT_COLUMNS",
]

FIT_COLUMNS = [
    "index",
    "mse",
    "center_x",
    "center_y",
    "phi_deg",
    "phase_deg",
    "freq",
    "var_par",
    "var_perp",
]


@dataclass(frozen=True)
class GaborParams:
    """Parameters of a Gabor kernel.

    :param center: (x, y) center of the envelope, in pixels
    :param rotation: angle φ of the oscillation axis, in radians
    :param phase: phase ψ, in radians
    :param frequency: spatial frequency, in cycles per pixel
    :param var_par: envelope variance along the oscillation axis (pixels²)
    :param var_perp: envelope variance across the oscillation axis (pixels²)
    :param amplitude: amplitude A
    """

    center: tuple
    rotation: float
    phase: float
    frequency: float
    var_par: float
    var_perp: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError("frequency must be positive")
        if not (self.var_par > 0 and self.var_perp > 0):
            raise ValueError("envelope variances must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def check_center(self, size):
        """Raises ValueError if the center is further than one patch width
        from the patch."""
        for c in self.center:
            if not -size <= c <= 2 * size:
                raise ValueError("center {:} is too far from the patch".format(self.center))

    def canonical(self):
        """Same kernel with positive amplitude, φ in [0, π) and ψ in (−π, π]."""
        rotation, phase, amplitude = self.rotation, self.phase, self.amplitude
        if amplitude < 0:
            amplitude, phase = -amplitude, phase + np.pi
        turns = np.floor(rotation / np.pi)
        rotation -= turns * np.pi
        if int(turns) % 2:
            # φ + π with ψ → −ψ is the same kernel
            phase = -phase
        phase = np.pi - np.mod(np.pi - phase, 2.0 * np.pi)
        return GaborParams(
            self.center,
            float(rotation),
            float(phase),
            self.frequency,
            self.var_par,
            self.var_perp,
            float(amplitude),
        )

    def as_row(self):
        """center_x, center_y, phi_deg, phase_deg, freq, var_par, var_perp"""
        return [
            self.center[0],
            self.center[1],
            np.degrees(self.rotation),
            np.degrees(self.phase),
            self.frequency,
            self.var_par,
            self.var_perp,
        ]


def _grid(size):
    y, x = np.mgrid[0:size, 0:size]
    return x.astype(float), y.astype(float)


def _rotated(x, y, center, rotation):
    dx, dy = x - center[0], y - center[1]
    c, s = np.cos(rotation), np.sin(rotation)
    return dx * c + dy * s, -dx * s + dy * c


def gabor_kernel(p, size):
    """size×size Gabor kernel of parameters p.

    :type p: :class:`GaborParams`
    :rtype: :class:`numpy.ndarray`
    """
    p.check_center(size)
    return _kernel(_grid(size), p.center, p.rotation, p.phase, p.frequency, p.var_par, p.var_perp) * p.amplitude


def _kernel(grid, center, rotation, phase, frequency, var_par, var_perp):
    u, v = _rotated(grid[0], grid[1], center, rotation)
    envelope = np.exp(-(u * u) / (2.0 * var_par) - (v * v) / (2.0 * var_perp))
    return envelope * np.cos(2.0 * np.pi * frequency * u + phase)


def _unit(patch):
    norm = np.linalg.norm(patch)
    return patch / norm if norm > 0 else np.zeros_like(patch)


def normalized_mse(patch, kernel):
    """``|p̂ − s k̂|²`` for the unit-norm patch p̂ and unit-norm kernel k̂,
    with the sign s matching k̂ to p̂. Equals ``2 − 2|p̂·k̂|``; the zero
    kernel scores 1.
    """
    k = np.asarray(kernel, dtype=float).ravel()
    if not np.any(k):
        return 1.0
    overlap = abs(float(_unit(np.asarray(patch, dtype=float).ravel()) @ _unit(k)))
    return 2.0 - 2.0 * overlap


@dataclass
class GaborFitConfig:
    """Grids and refinement settings of :func:`fit_gabor`.

    :param widths: number of blur widths, log-spaced in [0.5, size/2]
    :param rotations: number of rotations in [0, π)
    :param frequencies: number of frequencies, log-spaced in [1/size, 0.5]
    :param refined: candidates refined in (rotation, frequency)
    :param finalists: candidates re-optimized in all parameters
    :param refine_evals: residual evaluations of a stage-2 refinement
    :param final_evals: residual evaluations of a stage-3 optimization
    :param tol: relative tolerance on the residual and the parameters
    """

    widths: int = 8
    rotations: int = 12
    frequencies: int = 8
    refined: int = 8
    finalists: int = 5
    refine_evals: int = 60
    final_evals: int = 300
    tol: float = 1e-8

    def __post_init__(self):
        if min(self.widths, self.rotations, self.frequencies, self.refined, self.finalists) < 1:
            raise ValueError("Grid sizes and candidate counts must be ≥ 1")
        if min(self.refine_evals, self.final_evals) < 1 or not self.tol > 0:
            raise ValueError("Evaluation budgets must be ≥ 1 and tol > 0")


# Nonlinear parameters: cx, cy, rotation, log frequency, log var_par, log var_perp.
# Amplitude and phase are solved by linear least squares at every evaluation.
_MIN_FREQ, _MAX_FREQ = 1e-3, 0.5
_MIN_VAR = 0.1


class _Problem:
    """Residual of the best (amplitude, phase) kernel against one unit-norm
    patch, as a function of the nonlinear parameters."""

    def __init__(self, target, size, config):
        self.target = target
        self.size = size
        self.grid = _grid(size)
        self.config = config
        big = np.log(size * size)
        self.lower = np.array(
            [-size, -size, -np.inf, np.log(_MIN_FREQ), np.log(_MIN_VAR), np.log(_MIN_VAR)]
        )
        self.upper = np.array([2 * size, 2 * size, np.inf, np.log(_MAX_FREQ), big, big])

    def quadrature(self, z):
        """Even and odd kernels, as the two columns of a matrix."""
        x, y = self.grid
        u, v = _rotated(x, y, z[0:2], z[2])
        envelope = np.exp(-(u * u) / (2.0 * np.exp(z[4])) - (v * v) / (2.0 * np.exp(z[5])))
        arg = 2.0 * np.pi * np.exp(z[3]) * u
        return np.column_stack(
            ((envelope * np.cos(arg)).ravel(), (-envelope * np.sin(arg)).ravel())
        )

    def solve(self, z):
        """Coefficients of the quadrature pair and the residual."""
        pair = self.quadrature(z)
        coef = np.linalg.lstsq(pair, self.target, rcond=None)[0]
        return coef, self.target - pair @ coef

    def residual(self, z):
        return self.solve(z)[1]

    def mse(self, z):
        """Normalized MSE of the best kernel; the zero kernel scores 1."""
        coef, residual = self.solve(z)
        if not np.any(coef):
            return 1.0
        projected = max(1.0 - float(residual @ residual), 0.0)
        return 2.0 - 2.0 * np.sqrt(projected)

    def phase(self, z):
        coef = self.solve(z)[0]
        return float(np.arctan2(coef[1], coef[0]))

    def optimize(self, z0, free, max_evals):
        """Minimizes over the coordinates ``free`` of z, the others fixed.
        Returns (mse, z)."""
        free = np.asarray(free)
        z0 = np.clip(np.asarray(z0, dtype=float), self.lower, self.upper)

        def full(x):
            z = z0.copy()
            z[free] = x
            return z

        result = least_squares(
            lambda x: self.residual(full(x)),
            z0[free],
            bounds=(self.lower[free], self.upper[free]),
            method="trf",
            x_scale="jac",
            ftol=self.config.tol,
            xtol=self.config.tol,
            gtol=self.config.tol,
            max_nfev=max_evals,
        )
        z = full(result.x)
        return self.mse(z), z


def _centers(patch, config):
    """Stage 1: envelope centers and variances from blurred |patch|."""
    size = patch.shape[0]
    x, y = _grid(size)
    candidates = []
    for width in np.logspace(np.log10(0.5), np.log10(size / 2.0), config.widths):
        blurred = gaussian_filter(np.abs(patch), width, mode="reflect")
        total = blurred.sum()
        cx, cy = (blurred * x).sum() / total, (blurred * y).sum() / total
        spread = (blurred * ((x - cx) ** 2 + (y - cy) ** 2)).sum() / (2.0 * total)
        var = min(max(spread - width * width, 1.0), size * size)
        candidates.append((cx, cy, var))
    return candidates


def _screen(problem, center, var, config):
    """Stage 2 screening over the rotation and frequency grid, with an
    isotropic envelope. Yields (mse, z)."""
    size = problem.size
    for rotation in np.arange(config.rotations) * np.pi / config.rotations:
        for freq in np.logspace(np.log10(1.0 / size), np.log10(_MAX_FREQ), config.frequencies):
            z = np.array(
                [center[0], center[1], rotation, np.log(freq), np.log(var), np.log(var)]
            )
            yield problem.mse(z), z


def fit_gabor(patch, config=None):
    """Fits a Gabor kernel to a square patch.

    :param patch: size×size patch
    :type patch: :class:`numpy.ndarray`
    :param config: grids and refinement settings
    :type config: :class:`GaborFitConfig`, optional
    :raises ConstantPatch: if the patch has no variation
    :raises FitDiverged: if no candidate beats the zero kernel
    :return: best parameters (with the least-squares amplitude) and their
        normalized MSE
    :rtype: tuple(:class:`GaborParams`, float)
    """
    config = config if config is not None else GaborFitConfig()
    patch = np.asarray(patch, dtype=float)
    if patch.ndim != 2 or patch.shape[0] != patch.shape[1]:
        raise ShapeMismatch("Expected a square patch, got shape {:}".format(patch.shape))
    if not np.all(np.isfinite(patch)):
        raise ValueError("Patch contains non-finite values")
    if np.ptp(patch) <= 1e-12 * max(np.max(np.abs(patch)), 1.0):
        raise ConstantPatch("Patch has no variation")
    size = patch.shape[0]
    problem = _Problem(_unit(patch).ravel(), size, config)

    screened = []
    for cx, cy, var in _centers(patch, config):
        screened.extend(_screen(problem, (cx, cy), var, config))
    best_screened = heapq.nsmallest(config.refined, screened, key=lambda c: c[0])

    refined = [
        problem.optimize(z, [2, 3], config.refine_evals) for _, z in best_screened
    ]
    finalists = heapq.nsmallest(config.finalists, refined, key=lambda c: c[0])
    results = [
        problem.optimize(z, range(6), config.final_evals) for _, z in finalists
    ]
    mse, z = min(results, key=lambda c: c[0])
    if not mse < 1.0:
        raise FitDiverged(
            "Best normalized MSE {:.3g} is not better than the zero kernel".format(mse)
        )
    phase = problem.phase(z)
    kernel = _kernel(
        problem.grid, z[0:2], z[2], phase, np.exp(z[3]), np.exp(z[4]), np.exp(z[5])
    ).ravel()
    amplitude = float(kernel @ patch.ravel()) / float(kernel @ kernel)
    params = GaborParams(
        (z[0], z[1]), z[2], phase, np.exp(z[3]), np.exp(z[4]), np.exp(z[5]), amplitude
    ).canonical()
    return params, float(mse)


FitOutcome = namedtuple("FitOutcome", ["params", "mse", "status"])


def _fit_row(args):
    patch, config = args
    try:
        params, mse = fit_gabor(patch, config)
    except ConstantPatch:
        return FitOutcome(None, float("nan"), "constant")
    except FitDiverged:
        return FitOutcome(None, float("nan"), "diverged")
    return FitOutcome(params, mse, "ok")


@dataclass
class BasisFit:
    """Gabor fits of every element of a basis, in basis order.

    Failed fits have NaN parameters; ``status`` is "ok", "constant" or
    "diverged".
    """

    params: list
    mse: np.ndarray
    status: list

    def table(self):
        """Rows of :data:`FIT_COLUMNS` (index, mse, center_x, ..., var_perp)."""
        rows = []
        for index, (p, mse) in enumerate(zip(self.params, self.mse)):
            values = p.as_row() if p is not None else [float("nan")] * 7
            rows.append([index, mse] + values)
        return np.array(rows, dtype=float).reshape(-1, len(FIT_COLUMNS))

    def fraction_below(self, threshold):
        """Fraction of the basis elements fitted with a normalized MSE below
        threshold (failed fits count as above)."""
        if self.mse.size == 0:
            return 0.0
        with np.errstate(invalid="ignore"):
            return float(np.mean(self.mse < threshold))

    def to_csv(self, path):
        table = self.table()
        write_table_csv(
            path,
            table.T,
            FIT_COLUMNS,
            fmt=["%d"] + ["%.17g"] * (len(FIT_COLUMNS) - 1),
        )


def fit_basis(basis, config=None, workers=None, verbose=False):
    """Fits every row of a basis, reshaped to a square patch.

    :param basis: k×n basis with n a perfect square
    :param config: fit settings
    :type config: :class:`GaborFitConfig`, optional
    :param workers: worker processes, defaults to
        :func:`~oica.asynctools.worker_count`
    :param verbose: show a progress bar
    :raises ShapeMismatch: if n is not a perfect square
    :rtype: :class:`BasisFit`
    """
    w = np.atleast_2d(np.asarray(basis, dtype=float))
    k, n = w.shape
    size = int(round(np.sqrt(n)))
    if size * size != n:
        raise ShapeMismatch("Basis dimension {:d} is not a square patch".format(n))
    config = config if config is not None else GaborFitConfig()
    workers = worker_count(workers)
    items = [(row.reshape(size, size), config) for row in w]

    outcomes = []
    bar = ProgressBar(max_value=k) if verbose and k > 0 else None
    chunk = max(workers, 1) * 4
    for start in range(0, k, chunk):
        outcomes.extend(gather_map(_fit_row, items[start : start + chunk], workers))
        if bar is not None:
            bar.update(len(outcomes))
    if bar is not None:
        bar.finish()
    result = BasisFit(
        [o.params for o in outcomes],
        np.array([o.mse for o in outcomes], dtype=float),
        [o.status for o in outcomes],
    )
    if verbose:
        failed = sum(s != "ok" for s in result.status)
        cprint.blue("*** {:d} Gabor fits, {:d} failed".format(k, failed))
    return result
