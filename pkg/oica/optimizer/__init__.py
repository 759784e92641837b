"""Optimizers (:mod:`oica.optimizer`)
====================================

Minimization of objectives over bases with unit-norm rows.

:func:`minimize` is a projected limited-memory BFGS: search directions are
computed from gradients projected on the tangent space of the spheres, each
accepted step is followed by the norm-ball projection, and the curvature
pairs are formed from the projected iterates. :class:`ProjectedLBFGS` is the
underlying solver; it works on any array with user-supplied projection and
is also used, with a box projection, by the Gabor fits.

:func:`run_quasi_orth` iterates the quasi-orthogonality update instead.

.. autoclass:: OptimOptions

.. autoclass:: Termination

.. autoclass:: OptimTrace
   :members:

.. autoclass:: ProjectedLBFGS
   :members:

.. autofunction:: minimize

.. autofunction:: run_quasi_orth

"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from progressbar import ProgressBar
from fluiddyn.util.terminal_colors import cprint

from oica.core import (
    NonFiniteObjective,
    min_pairwise_angle,
    project_rows_unit_norm,
    tangent_component,
    write_table_csv,
)
from oica.costs import cost_l2, quasi_orth_update

__all__ = [
    "OptimOptions",
    "Termination",
    "OptimTrace",
    "ProjectedLBFGS",
    "minimize",
    "run_quasi_orth",
]


@dataclass
class OptimOptions:
    """Options of the projected quasi-Newton solver.

    :param max_iters: maximum number of iterations
    :param grad_tol: tolerance on the infinity norm of the projected gradient
    :param history: number of stored curvature pairs
    :param initial_step: first step tried by the backtracking line search
    :param shrink: step reduction factor of the line search, in (0, 1)
    :param sufficient_decrease: Armijo constant
    :param max_backtracks: line search gives up after this many reductions
    :param curvature_tol: curvature pairs with ``yᵀs`` below this are dropped
    :param seed: seed of the random initializations built from these options
    """

    max_iters: int = 2000
    grad_tol: float = 1e-7
    history: int = 10
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 60
    curvature_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 0 or self.history < 1:
            raise ValueError("max_iters must be ≥ 0 and history ≥ 1")
        if not (self.grad_tol > 0 and self.initial_step > 0):
            raise ValueError("grad_tol and initial_step must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must be in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must be in (0, 1)")


class Termination(Enum):
    GRAD_TOL = "GradTol"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAIL = "LineSearchFail"


@dataclass
class OptimTrace:
    """Per-iteration record of an optimization. Iteration 0 is the
    starting point.
    """

    objective: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    min_angle_deg: list = field(default_factory=list)
    termination: Termination = None
    rejected_pairs: int = 0

    def record(self, objective, grad_norm, min_angle):
        self.objective.append(float(objective))
        self.grad_norm.append(float(grad_norm))
        self.min_angle_deg.append(float(min_angle))

    @property
    def iterations(self):
        return max(len(self.objective) - 1, 0)

    def to_csv(self, path):
        """Writes the trace as CSV: iter, objective, grad_norm, min_angle_deg."""
        write_table_csv(
            path,
            [
                np.arange(len(self.objective)),
                self.objective,
                self.grad_norm,
                self.min_angle_deg,
            ],
            ["iter", "objective", "grad_norm", "min_angle_deg"],
            fmt=["%d", "%.17g", "%.17g", "%.17g"],
        )

    def summary(self):
        return {
            "iterations": self.iterations,
            "termination": None if self.termination is None else self.termination.value,
            "initial_objective": self.objective[0] if self.objective else None,
            "final_objective": self.objective[-1] if self.objective else None,
            "final_grad_norm": self.grad_norm[-1] if self.grad_norm else None,
            "rejected_curvature_pairs": self.rejected_pairs,
        }


def _identity(x):
    return x


def _identity_tangent(x, direction):
    return direction


def _nan_monitor(x):
    return float("nan")


class ProjectedLBFGS:
    """Limited-memory BFGS with a backtracking line search and a projection
    applied after every step.

    :param options: solver options
    :type options: :class:`OptimOptions`, optional
    :param project: maps any array on the feasible set
    :type project: callable, optional
    :param tangent: ``tangent(x, g)`` projects a gradient on the directions
        along which the feasible set can be followed at x
    :type tangent: callable, optional
    :param monitor: scalar recorded in the trace at every iterate
    :type monitor: callable, optional
    :param verbose: show a progress bar and the termination reason
    :type verbose: bool, optional
    """

    def __init__(
        self, options=None, project=None, tangent=None, monitor=None, verbose=False
    ):
        self.options = options if options is not None else OptimOptions()
        self.project = project if project is not None else _identity
        self.tangent = tangent if tangent is not None else _identity_tangent
        self.monitor = monitor if monitor is not None else _nan_monitor
        self.verbose = verbose

    @staticmethod
    def _two_loop(g, pairs):
        """Applies the L-BFGS inverse Hessian approximation to g."""
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(pairs):
            a = rho * np.vdot(s, q)
            q -= a * y
            alphas.append(a)
        s, y, rho = pairs[-1]
        q *= np.vdot(s, y) / np.vdot(y, y)
        for (s, y, rho), a in zip(pairs, reversed(alphas)):
            b = rho * np.vdot(y, q)
            q += (a - b) * s
        return q

    def _evaluate(self, fun, x):
        f, g = fun(x)
        g = np.asarray(g, dtype=float)
        return float(f), g

    def minimize(self, fun, x0):
        """Minimizes ``fun`` from ``x0``.

        :param fun: returns ``(value, gradient)`` at x
        :type fun: callable
        :param x0: starting point
        :type x0: :class:`numpy.ndarray`
        :raises NonFiniteObjective: if the objective or its gradient is not
            finite at the (projected) starting point
        :return: final point and trace
        :rtype: tuple(:class:`numpy.ndarray`, :class:`OptimTrace`)
        """
        opts = self.options
        x = self.project(np.array(x0, dtype=float))
        f, g = self._evaluate(fun, x)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise NonFiniteObjective(
                "Objective is not finite at the starting point (value {:})".format(f)
            )
        gt = self.tangent(x, g)
        trace = OptimTrace()
        trace.record(f, np.max(np.abs(gt), initial=0.0), self.monitor(x))
        pairs = deque(maxlen=opts.history)

        bar = ProgressBar(max_value=opts.max_iters) if self.verbose else None
        termination = Termination.MAX_ITERS
        for iteration in range(opts.max_iters):
            if trace.grad_norm[-1] <= opts.grad_tol:
                termination = Termination.GRAD_TOL
                break
            if pairs:
                d = self.tangent(x, -self._two_loop(gt, pairs))
            else:
                d = -gt / max(1.0, np.max(np.abs(gt)))
            slope = np.vdot(gt, d)
            if not slope < 0:
                pairs.clear()
                d = -gt / max(1.0, np.max(np.abs(gt)))
                slope = np.vdot(gt, d)

            step = opts.initial_step
            accepted = False
            for _ in range(opts.max_backtracks):
                x_new = self.project(x + step * d)
                f_new, g_new = self._evaluate(fun, x_new)
                if np.isfinite(f_new) and f_new <= f + opts.sufficient_decrease * step * slope:
                    accepted = np.all(np.isfinite(g_new))
                    break
                step *= opts.shrink
            if not accepted:
                termination = Termination.LINE_SEARCH_FAIL
                break

            gt_new = self.tangent(x_new, g_new)
            s = x_new - x
            y = gt_new - gt
            sy = np.vdot(s, y)
            if sy > opts.curvature_tol:
                pairs.append((s, y, 1.0 / sy))
            else:
                trace.rejected_pairs += 1
            x, f, gt = x_new, f_new, gt_new
            trace.record(f, np.max(np.abs(gt), initial=0.0), self.monitor(x))
            if bar is not None:
                bar.update(iteration + 1)
        else:
            if trace.grad_norm[-1] <= opts.grad_tol:
                termination = Termination.GRAD_TOL
        if bar is not None:
            bar.finish()
        trace.termination = termination
        if self.verbose:
            cprint.blue(
                "*** {:} after {:d} iterations, objective {:.6g}".format(
                    termination.value, trace.iterations, f
                )
            )
        return x, trace


def minimize(evaluator, w0, opts=None, verbose=False):
    """Minimizes an objective over bases with unit-norm rows.

    :param evaluator: returns a :class:`~oica.costs.CostEval` (or any
        ``(value, gradient)`` pair) for a basis; must be pure
    :type evaluator: callable
    :param w0: k×n starting basis with unit-norm rows
    :type w0: :class:`numpy.ndarray`
    :param opts: solver options
    :type opts: :class:`OptimOptions`, optional
    :param verbose: progress bar and termination message
    :type verbose: bool, optional
    :raises NonFiniteObjective: if the objective is not finite at w0
    :return: the final basis (unit-norm rows) and the trace, which records
        the minimum acute pairwise angle of every iterate
    :rtype: tuple(:class:`numpy.ndarray`, :class:`OptimTrace`)
    """
    solver = ProjectedLBFGS(
        opts,
        project=project_rows_unit_norm,
        tangent=tangent_component,
        monitor=min_pairwise_angle,
        verbose=verbose,
    )
    return solver.minimize(evaluator, w0)


def run_quasi_orth(w0, iters, prescale=False, verbose=False):
    """Iterates the quasi-orthogonality update.

    The trace records, for every iterate, the L2 cost as objective, the
    largest entry change of the last update as ``grad_norm``, and the
    minimum acute pairwise angle.

    :param w0: k×n starting basis with unit-norm rows
    :type w0: :class:`numpy.ndarray`
    :param iters: number of updates
    :type iters: int
    :param prescale: see :func:`~oica.costs.quasi_orth_update`
    :type prescale: bool, optional
    :raises ZeroRow: if the update makes a row vanish
    :rtype: tuple(:class:`numpy.ndarray`, :class:`OptimTrace`)
    """
    w = project_rows_unit_norm(w0)
    trace = OptimTrace()
    trace.record(cost_l2(w).value, 0.0, min_pairwise_angle(w))
    bar = ProgressBar(max_value=iters) if verbose and iters > 0 else None
    for iteration in range(iters):
        w_new = quasi_orth_update(w, prescale=prescale)
        change = np.max(np.abs(w_new - w))
        w = w_new
        trace.record(cost_l2(w).value, change, min_pairwise_angle(w))
        if bar is not None:
            bar.update(iteration + 1)
    if bar is not None:
        bar.finish()
    trace.termination = Termination.MAX_ITERS
    return w, trace
