"""Experiments (:mod:`oica.util.experiments`)
==========================================

Implementation of the ``oica`` subcommands. Every ``cmd_*`` function takes
an :class:`ExperimentConfig` (the global flags) plus its own parameters,
writes its CSV/JSON outputs to the output directory and returns the exit
status: 0 if and only if all its declared tolerances are met.

Outputs depend only on the flags and the seed. The optional HDF5 archive
(``--archive``) also records the creation date.

.. autoclass:: ExperimentConfig
   :members:

"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fluiddyn.util.terminal_colors import cprint

from oica.core import (
    CostKind,
    CostVariant,
    DEFAULT_EPS,
    angle_stats,
    min_pairwise_angle,
    read_matrix_csv,
    write_json,
    write_matrix_csv,
    write_table_csv,
)
from oica.costs import grad_check
from oica.objective import IcaObjective, reconstruction_error
from oica.optimizer import OptimOptions, minimize, run_quasi_orth
from oica.analytic2d import check_path, theta2_grid
from oica.highdim import (
    DEFAULT_EPS_LIST,
    PathologicalInit,
    critical_point_scan,
    fit_power_law,
    gradient_profile,
    pathological_init,
    random_uniform_init,
    rotation_deltas,
)
from oica.data import (
    amari_index,
    extract_patches,
    fit_whitening,
    read_pgm,
    synth_sources,
    synthetic_texture,
    write_pgm,
)
from oica.gabor import fit_basis
from oica.session import RunArchive, SavedRun
from oica.asynctools import gather_map
from oica.util.report import ToleranceReport
import oica.mytime as mytime

__all__ = [
    "ExperimentConfig",
    "cmd_check2d",
    "cmd_distribution",
    "cmd_train",
    "cmd_recover",
    "cmd_invariance",
    "cmd_critical",
    "cmd_gradprofile",
    "cmd_gabors",
    "cmd_gradcheck",
    "cmd_info",
    "cmd_texture",
]

COST_NAMES = [v.value for v in CostVariant]

# default sparsity weights
TRAIN_LAMBDA = 10.0
RECOVER_LAMBDA = 0.5


@dataclass
class ExperimentConfig:
    """Global flags shared by every subcommand.

    :param seed: random seed
    :param out: output directory
    :param cost: degeneracy-control cost
    :param lam: sparsity weight λ (None: the default of each command)
    :param max_iters: maximum optimizer iterations
    :param grad_tol: optimizer gradient tolerance
    :param verbose: progress bars and status messages
    :param archive: also write an HDF5 run archive
    :param workers: worker processes (None: ``OICA_THREADS`` or the CPU count)
    """

    seed: int = 0
    out: Path = field(default_factory=lambda: Path("."))
    cost: CostKind = field(default_factory=lambda: CostKind(CostVariant.L2))
    lam: float = None
    max_iters: int = 2000
    grad_tol: float = 1e-7
    verbose: bool = False
    archive: bool = False
    workers: int = None

    def __post_init__(self):
        self.out = Path(self.out)
        if self.seed < 0:
            raise ValueError("seed must be ≥ 0")
        if self.lam is not None and not self.lam >= 0:
            raise ValueError("lambda must be ≥ 0")
        if self.max_iters < 0 or not self.grad_tol > 0:
            raise ValueError("max-iters must be ≥ 0 and grad-tol > 0")

    @classmethod
    def from_args(cls, args):
        """Builds the configuration from parsed command-line arguments."""
        return cls(
            seed=args.seed,
            out=Path(args.out),
            cost=CostKind.parse(args.cost, args.eps),
            lam=args.lam,
            max_iters=args.max_iters,
            grad_tol=args.grad_tol,
            verbose=args.verbose,
            archive=args.archive,
        )

    def options(self, **kwargs):
        """:class:`~oica.optimizer.OptimOptions` from the global flags."""
        params = dict(max_iters=self.max_iters, grad_tol=self.grad_tol, seed=self.seed)
        params.update(kwargs)
        return OptimOptions(**params)

    def sparsity(self, default):
        """λ from the flags, or the command default."""
        return default if self.lam is None else self.lam

    def path(self, name):
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def parameters(self):
        return {
            "seed": self.seed,
            "cost": self.cost.name,
            "eps": self.cost.eps,
            "lambda": self.lam,
            "max_iters": self.max_iters,
            "grad_tol": self.grad_tol,
        }


def _finish(config, report, summary_name, summary):
    summary = dict(summary)
    summary["tolerances"] = report.summary()
    write_json(config.path(summary_name), summary)
    return report.print_report()


def _archive(config, command, parameters, datasets, trace=None):
    if not config.archive:
        return
    with RunArchive(config.path(command), verbose=config.verbose) as archive:
        archive.save_parameter(command=command, **config.parameters())
        archive.save_parameter(**parameters)
        for name, data in datasets.items():
            archive.save_dataset(name, data)
        if trace is not None:
            archive.save_trace(trace)


def cmd_check2d(config, grid_points=720, inject_error=0.0):
    """Closed forms of the two-dimensional path against numerics, for L2 and
    L4, over ``grid_points`` values of θ2.

    :param inject_error: error added to the closed-form costs (negative
        control: any value above the tolerance must fail)
    """
    if grid_points < 1:
        raise ValueError("grid_points must be ≥ 1")
    report = ToleranceReport("check2d")
    summary = {"grid_points": int(grid_points), "inject_error": inject_error}
    names = [
        "theta2",
        "cost_closed",
        "cost_numeric",
        "max_grad_err",
        "max_hess_err",
        "max_eig_err",
        "max_fd_eig_err",
    ]
    for kind in ("l2", "l4"):
        checks = [check_path(kind, t, inject_error) for t in theta2_grid(grid_points)]
        table = np.array(checks, dtype=float)
        write_table_csv(config.path("check2d_{:}.csv".format(kind)), table.T, names)
        cost_err = float(np.max(np.abs(table[:, 1] - table[:, 2])))
        errors = {
            "max_cost_err": cost_err,
            "max_grad_err": float(np.max(table[:, 3])),
            "max_hess_err": float(np.max(table[:, 4])),
            "max_eig_err": float(np.max(table[:, 5])),
            "max_fd_eig_err": float(np.max(table[:, 6])),
        }
        summary[kind] = errors
        report.check(kind + " cost", errors["max_cost_err"], 1e-10)
        report.check(kind + " gradient", errors["max_grad_err"], 1e-6)
        report.check(kind + " hessian", errors["max_hess_err"], 1e-5)
        report.check(kind + " eigenvalues", errors["max_eig_err"], 1e-9)
        report.check(kind + " fd eigenvalues", errors["max_fd_eig_err"], 1e-5)
    return _finish(config, report, "check2d.json", summary)


def _initial_basis(config, init, k, n, m_tiles, sigma):
    if init == "random":
        return random_uniform_init(k, n, config.seed)
    elif init == "pathological":
        return pathological_init(PathologicalInit(n, m_tiles, sigma, config.seed))
    raise ValueError("init must be random or pathological")


def _optimize(config, w0, mechanism="cost", data=None, lam=0.0, cost=None):
    if mechanism == "quasi_orth":
        return run_quasi_orth(w0, config.max_iters, verbose=config.verbose)
    elif mechanism != "cost":
        raise ValueError("mechanism must be cost or quasi_orth")
    objective = IcaObjective(config.cost if cost is None else cost, lam, data)
    return minimize(objective, w0, config.options(), verbose=config.verbose)


def cmd_distribution(
    config,
    init="random",
    k=128,
    n=64,
    m_tiles=2,
    sigma=0.05,
    mechanism="cost",
    min_angle_above=None,
    min_angle_below=None,
):
    """Optimizes the pure degeneracy cost (λ = 0) from a random or
    pathological initialization and records the angle distributions.

    With ``mechanism="quasi_orth"`` the quasi-orthogonality update is
    iterated instead (``max_iters`` times). The optional bounds on the final
    minimum angle are the declared tolerances.
    """
    w0 = _initial_basis(config, init, k, n, m_tiles, sigma)
    mytime.tic()
    w, trace = _optimize(config, w0, mechanism)
    mytime.toc("distribution:", verbose=config.verbose)
    initial, final = angle_stats(w0), angle_stats(w)
    write_table_csv(
        config.path("distribution_hist.csv"),
        [initial.bin_edges[:-1], initial.bin_edges[1:], initial.counts, final.counts],
        ["bin_lo_deg", "bin_hi_deg", "initial_count", "final_count"],
        fmt=["%g", "%g", "%d", "%d"],
    )
    trace.to_csv(config.path("distribution_trace.csv"))
    write_matrix_csv(config.path("distribution_basis.csv"), w)

    report = ToleranceReport("distribution")
    if min_angle_above is not None:
        report.check("final min angle", final.min, min_angle_above, ">")
    if min_angle_below is not None:
        report.check("final min angle", final.min, min_angle_below, "<")
    mechanism_name = config.cost.name if mechanism == "cost" else "quasi_orth"
    summary = {
        "init": init,
        "mechanism": mechanism_name,
        "k": int(w.shape[0]),
        "n": int(w.shape[1]),
        "initial": initial.summary(),
        "final": final.summary(),
        "optimizer": trace.summary(),
    }
    _archive(
        config,
        "distribution",
        {"init": init, "mechanism": mechanism_name, "sigma": sigma},
        {"basis": w, "initial_basis": w0, "angles": final.angles},
        trace,
    )
    return _finish(config, report, "distribution.json", summary)


def cmd_train(
    config,
    image=None,
    patch_size=8,
    num_patches=20000,
    k=None,
    whiten="zca",
    floor=None,
    texture_size=512,
    fit_gabors=False,
    min_angle_above=None,
    gabor_fraction_above=None,
    gabor_mse=0.5,
):
    """Full pipeline: patches, whitening, minimization of the total
    objective, and optionally Gabor fits of the learned basis.

    :param image: PGM image file, or None for the bundled synthetic texture
    :param k: number of basis elements, defaults to 4 n ("four times
        overcomplete")
    """
    if image is None:
        picture = synthetic_texture(texture_size, config.seed)
        source = "synthetic_texture"
    else:
        picture = read_pgm(image)
        source = str(image)
    n = patch_size * patch_size
    k = 4 * n if k is None else k
    raw = extract_patches(picture, patch_size, num_patches, config.seed)
    whitening = fit_whitening(raw, whiten, floor)
    data = whitening.apply(raw)
    w0 = random_uniform_init(k, n, config.seed)
    lam = config.sparsity(TRAIN_LAMBDA)

    mytime.tic()
    w, trace = _optimize(config, w0, data=data, lam=lam)
    mytime.toc("train:", verbose=config.verbose)

    write_matrix_csv(config.path("train_basis.csv"), w)
    write_matrix_csv(config.path("train_whitening.csv"), whitening.matrix)
    trace.to_csv(config.path("train_trace.csv"))
    stats = angle_stats(w)
    norms = np.linalg.norm(w, axis=1)
    report = ToleranceReport("train")
    report.check("row norm error", np.max(np.abs(norms - 1.0)), 1e-9)
    if min_angle_above is not None:
        report.check("final min angle", stats.min, min_angle_above, ">")
    summary = {
        "source": source,
        "patch_size": patch_size,
        "num_patches": num_patches,
        "k": k,
        "n": n,
        "lambda": lam,
        "whitening": {
            "kind": whitening.kind.value,
            "floor": whitening.floor,
            "floored_eigenvalues": whitening.floored,
        },
        "reconstruction_error": reconstruction_error(w, data),
        "angles": stats.summary(),
        "optimizer": trace.summary(),
    }
    if fit_gabors:
        fits = fit_basis(w, workers=config.workers, verbose=config.verbose)
        fits.to_csv(config.path("train_gabors.csv"))
        fraction = fits.fraction_below(gabor_mse)
        summary["gabor"] = {"mse_threshold": gabor_mse, "fraction_below": fraction}
        if gabor_fraction_above is not None:
            report.check("gabor fraction", fraction, gabor_fraction_above, ">=")
    _archive(
        config,
        "train",
        {
            "source": source,
            "patch_size": patch_size,
            "num_patches": num_patches,
            "lambda": lam,
        },
        {
            "basis": w,
            "initial_basis": w0,
            "angles": stats.angles,
            "whitening": whitening.matrix,
        },
        trace,
    )
    return _finish(config, report, "train.json", summary)


def cmd_recover(config, n=8, m=50000, identity=False, threshold=0.1, whiten="zca"):
    """Complete ICA (k = n) on whitened mixtures of Laplacian sources; the
    Amari index against the true mixing must be below ``threshold``.

    The degeneracy cost is always L2, whatever ``config.cost``.

    :param identity: use the identity mixing
    """
    mixing = np.eye(n) if identity else None
    sources = synth_sources(n, m, config.seed, mixing)
    whitening = fit_whitening(sources.data, whiten)
    data = whitening.apply(sources.data)
    w0 = random_uniform_init(n, n, config.seed)
    lam = config.sparsity(RECOVER_LAMBDA)
    cost = CostKind(CostVariant.L2)
    w, trace = _optimize(config, w0, data=data, lam=lam, cost=cost)
    index = amari_index(w, sources.mixing, whitening)
    report = ToleranceReport("recover")
    report.check("amari index", index, threshold)
    write_matrix_csv(config.path("recover_unmixing.csv"), w)
    summary = {
        "n": n,
        "m": m,
        "identity_mixing": bool(identity),
        "cost": cost.name,
        "lambda": lam,
        "amari_index": index,
        "optimizer": trace.summary(),
    }
    _archive(
        config,
        "recover",
        {"n": n, "m": m, "cost": cost.name, "lambda": lam},
        {"unmixing": w, "mixing": sources.mixing, "whitening": whitening.matrix},
        trace,
    )
    return _finish(config, report, "recover.json", summary)


def cmd_invariance(config, n=4, m_tiles=2, trials=100, threshold=1e-9):
    """Random rotations of the first orthonormal subset of an exact
    pathological configuration. The L2 cost must not change; the L4 change
    is recorded for comparison.
    """
    w = pathological_init(PathologicalInit(n, m_tiles, 0.0, config.seed))
    l2 = rotation_deltas(w, n, m_tiles, trials, CostKind(CostVariant.L2), config.seed, config.workers)
    l4 = rotation_deltas(w, n, m_tiles, trials, CostKind(CostVariant.L4), config.seed, config.workers)
    write_table_csv(
        config.path("invariance.csv"),
        [np.arange(trials), l2, l4],
        ["trial", "delta_l2", "delta_l4"],
        fmt=["%d", "%.17g", "%.17g"],
    )
    report = ToleranceReport("invariance")
    max_l2 = float(np.max(l2, initial=0.0))
    report.check("max |dC_l2|", max_l2, threshold)
    summary = {
        "n": n,
        "m_tiles": m_tiles,
        "trials": trials,
        "max_delta_l2": max_l2,
        "max_delta_l4": float(np.max(l4, initial=0.0)),
    }
    return _finish(config, report, "invariance.json", summary)


def _critical_trial(args):
    w, shape, kind, seed, eps_list = args
    rng = np.random.default_rng(seed.spawn(1)[0])
    row = int(rng.integers(w.shape[0]))
    return critical_point_scan(w, row, rng.integers(2 ** 32), eps_list, kind, shape)


def cmd_critical(
    config,
    n=4,
    m_tiles=2,
    trials=20,
    eps_list=DEFAULT_EPS_LIST,
    random_basis=False,
    tolerance=0.1,
):
    """Single-row rotation scans. At an exact pathological configuration the
    fitted slope must be 2 (critical point); with ``random_basis`` the scan
    is done at random bases and the slope must be 1.
    """
    kind = config.cost
    seeds = np.random.SeedSequence(config.seed).spawn(trials)
    items = []
    for t, seed in enumerate(seeds):
        if random_basis:
            w = random_uniform_init(n * m_tiles, n, seed)
            shape = None
        else:
            w = pathological_init(PathologicalInit(n, m_tiles, 0.0, seed))
            shape = (n, m_tiles)
        items.append((w, shape, kind, seed, eps_list))
    scans = gather_map(_critical_trial, items, config.workers)

    expected = 1.0 if random_basis else 2.0
    report = ToleranceReport("critical")
    rows = []
    for t, scan in enumerate(scans):
        report.check("slope trial {:d}".format(t), abs(scan.slope - expected), tolerance, "<=")
        rows.extend([t, e, d] for e, d in zip(scan.eps, scan.delta))
    table = np.array(rows, dtype=float).reshape(-1, 3)
    write_table_csv(
        config.path("critical.csv"),
        table.T,
        ["trial", "eps", "delta"],
        fmt=["%d", "%.17g", "%.17g"],
    )
    slopes = [s.slope for s in scans]
    summary = {
        "n": n,
        "m_tiles": m_tiles,
        "random_basis": bool(random_basis),
        "cost": kind.name,
        "expected_slope": expected,
        "slopes": slopes,
    }
    return _finish(config, report, "critical.json", summary)


def cmd_gradprofile(config, region="near_zero", samples=200, delta=1e-3):
    """Angular gradient of the four costs for two rows; near cos θ = 0 the
    fitted exponents must be 1 (L2, Coulomb, random prior) and 3 (L4), near
    cos θ = 1 the Coulomb gradient must increase monotonically.
    """
    eps = config.cost.eps
    kinds = [CostKind(v, eps if v.singular else DEFAULT_EPS) for v in CostVariant]
    profiles = {k.name: gradient_profile(k, region, samples, delta) for k in kinds}
    cos_theta = profiles["l2"].cos_theta
    write_table_csv(
        config.path("gradprofile_{:}.csv".format(region)),
        [cos_theta] + [profiles[name].gradient for name in COST_NAMES],
        ["cos_theta"] + COST_NAMES,
    )
    report = ToleranceReport("gradprofile")
    summary = {"region": region, "samples": samples}
    if region == "near_zero":
        fits = {name: fit_power_law(p)._asdict() for name, p in profiles.items()}
        summary["power_law"] = fits
        for name, fit in fits.items():
            expected, tol = (3.0, 0.2) if name == "l4" else (1.0, 0.1)
            report.check(name + " exponent", abs(fit["exponent"] - expected), tol, "<=")
        for name in ("l2", "l4"):
            report.check(name + " r2", fits[name]["r2"], 0.999, ">")
        small = (cos_theta > 0) & (cos_theta < 0.05)
        l4 = profiles["l4"].gradient[small]
        others = np.min([profiles[name].gradient[small] for name in COST_NAMES if name != "l4"], axis=0)
        report.require("l4 smallest below cos 0.05", np.all(l4 < others))
    else:
        increasing = np.all(np.diff(profiles["coulomb"].gradient) > 0)
        summary["coulomb_monotone"] = bool(increasing)
        report.require("coulomb gradient increasing", increasing)
    return _finish(config, report, "gradprofile_{:}.json".format(region), summary)


def cmd_gabors(config, basis_path, mse_threshold=0.5, min_fraction=None):
    """Gabor fits of every element of a basis CSV, one output row each."""
    w = read_matrix_csv(basis_path)
    mytime.tic()
    fits = fit_basis(w, workers=config.workers, verbose=config.verbose)
    mytime.toc("gabors:", verbose=config.verbose)
    fits.to_csv(config.path("gabors.csv"))
    fraction = fits.fraction_below(mse_threshold)
    report = ToleranceReport("gabors")
    if min_fraction is not None:
        report.check("fraction below mse threshold", fraction, min_fraction, ">=")
    ok = fits.mse[np.isfinite(fits.mse)]
    summary = {
        "basis": str(basis_path),
        "elements": int(w.shape[0]),
        "failed": [i for i, s in enumerate(fits.status) if s != "ok"],
        "median_mse": float(np.median(ok)) if ok.size else None,
        "mse_threshold": mse_threshold,
        "fraction_below": fraction,
    }
    return _finish(config, report, "gabors.json", summary)


def _gradcheck_basis(rng, max_k, max_n, singular, min_angle):
    for _ in range(1000):
        n = int(rng.integers(2, max_n + 1))
        k = int(rng.integers(2, max_k + 1))
        if singular:
            k = min(k, 2 * n)
        w = random_uniform_init(k, n, rng)
        if not singular or min_pairwise_angle(w) > min_angle:
            return w
    raise RuntimeError("Could not draw a basis with pairwise angles above {:g}°".format(min_angle))


def cmd_gradcheck(config, bases=50, max_k=32, max_n=16, h=1e-5, min_angle=10.0):
    """Analytic gradients of the four costs against central finite
    differences on random bases. Bases for the singular costs are redrawn
    until their minimum angle exceeds ``min_angle`` degrees.
    """
    rng = np.random.default_rng(config.seed)
    report = ToleranceReport("gradcheck")
    summary = {"bases": bases, "h": h}
    for variant in CostVariant:
        kind = CostKind(variant, config.cost.eps if variant.singular else DEFAULT_EPS)
        rows = []
        for trial in range(bases):
            w = _gradcheck_basis(rng, max_k, max_n, variant.singular, min_angle)
            rows.append([trial, w.shape[0], w.shape[1], grad_check(kind, w, h)])
        table = np.array(rows, dtype=float).reshape(-1, 4)
        write_table_csv(
            config.path("gradcheck_{:}.csv".format(kind.name)),
            table.T,
            ["trial", "k", "n", "rel_error"],
            fmt=["%d", "%d", "%d", "%.17g"],
        )
        worst = float(np.max(table[:, 3], initial=0.0))
        summary[kind.name] = worst
        report.check(kind.name + " max relative error", worst, 1e-4 if variant.singular else 1e-5)
    return _finish(config, report, "gradcheck.json", summary)


def cmd_info(path, verbose=False):
    """Prints the content of a run archive."""
    with SavedRun(path, verbose=verbose) as run:
        print(run.describe())
    return 0


def cmd_texture(config, size=512, name="texture.pgm"):
    """Writes the bundled synthetic texture as a 16-bit PGM file."""
    path = config.path(name)
    write_pgm(path, synthetic_texture(size, config.seed))
    if config.verbose:
        cprint.blue("*** Texture written to " + str(path))
    return 0
