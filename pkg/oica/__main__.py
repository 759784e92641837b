"""

oica CLI interface

"""

import sys
from argparse import ArgumentParser

from fluiddyn.util.terminal_colors import cprint

from oica.core import OicaError, DEFAULT_EPS
from oica.highdim import DEFAULT_EPS_LIST
from oica.util.experiments import (
    ExperimentConfig,
    COST_NAMES,
    cmd_check2d,
    cmd_distribution,
    cmd_train,
    cmd_recover,
    cmd_invariance,
    cmd_critical,
    cmd_gradprofile,
    cmd_gabors,
    cmd_gradcheck,
    cmd_info,
    cmd_texture,
)

# Global flags, shared by every experiment subcommand
common = ArgumentParser(add_help=False)
common.add_argument("--seed", help="random seed", type=int, default=0, metavar="seed")
common.add_argument(
    "--out", help="output directory", default=".", metavar="directory"
)
common.add_argument(
    "--cost",
    help="degeneracy-control cost",
    choices=COST_NAMES,
    default="l2",
)
common.add_argument(
    "--eps",
    help="regularization of the coulomb and rand_prior costs",
    type=float,
    default=DEFAULT_EPS,
    metavar="eps",
)
common.add_argument(
    "--lambda",
    help="sparsity weight (default: 10 for train, 0.5 for recover)",
    dest="lam",
    type=float,
    default=None,
    metavar="lambda",
)
common.add_argument(
    "--max-iters", help="maximum optimizer iterations", type=int, default=2000
)
common.add_argument(
    "--grad-tol", help="optimizer gradient tolerance", type=float, default=1e-7
)
common.add_argument(
    "-v", "--verbose", help="progress bars and status messages", action="store_true"
)
common.add_argument(
    "--archive", help="also write an HDF5 run archive", action="store_true"
)

# Create top-level parser
parser = ArgumentParser(description=__doc__, prog="oica")
subparsers = parser.add_subparsers(title="command", help="oica command", dest="command")

# Create parser for the "check2d" command
parser_check2d = subparsers.add_parser(
    "check2d", parents=[common], help="checks the 2D closed forms against numerics"
)
parser_check2d.add_argument(
    "--grid-points", help="number of theta2 values", type=int, default=720
)
parser_check2d.add_argument(
    "--inject-error",
    help="error added to the closed-form costs (negative control)",
    type=float,
    default=0.0,
)

# Create parser for the "distribution" command
parser_distribution = subparsers.add_parser(
    "distribution",
    parents=[common],
    help="angle distributions after optimizing the degeneracy cost",
)
parser_distribution.add_argument(
    "--init", choices=["random", "pathological"], default="random"
)
parser_distribution.add_argument(
    "--mechanism",
    help="optimize the cost, or iterate the quasi-orthogonality update",
    choices=["cost", "quasi_orth"],
    default="cost",
)
parser_distribution.add_argument("-k", help="basis size (random init)", type=int, default=128)
parser_distribution.add_argument("-n", help="dimension", type=int, default=64)
parser_distribution.add_argument(
    "-M", help="overcompleteness (pathological init)", dest="m_tiles", type=int, default=2
)
parser_distribution.add_argument(
    "--sigma", help="noise (pathological init)", type=float, default=0.05
)
parser_distribution.add_argument(
    "--min-angle-above", help="require a final min angle above (deg)", type=float
)
parser_distribution.add_argument(
    "--min-angle-below", help="require a final min angle below (deg)", type=float
)

# Create parser for the "train" command
parser_train = subparsers.add_parser(
    "train", parents=[common], help="overcomplete ICA on whitened image patches"
)
parser_train.add_argument(
    "--image", help="8 or 16-bit PGM image (default: synthetic texture)", default=None
)
parser_train.add_argument("--patch-size", type=int, default=8)
parser_train.add_argument("--num-patches", type=int, default=20000)
parser_train.add_argument("-k", help="basis size (default: 4 patch_size²)", type=int)
parser_train.add_argument("--whiten", choices=["pca", "zca"], default="zca")
parser_train.add_argument(
    "--floor", help="absolute eigenvalue floor (default: 1e-4 max)", type=float
)
parser_train.add_argument("--texture-size", type=int, default=512)
parser_train.add_argument(
    "--fit-gabors", help="fit Gabor kernels to the basis", action="store_true"
)
parser_train.add_argument("--min-angle-above", type=float)
parser_train.add_argument("--gabor-fraction-above", type=float)
parser_train.add_argument("--gabor-mse", type=float, default=0.5)

# Create parser for the "recover" command
parser_recover = subparsers.add_parser(
    "recover", parents=[common], help="complete ICA on synthetic Laplacian sources"
)
parser_recover.add_argument("-n", type=int, default=8)
parser_recover.add_argument("-m", type=int, default=50000)
parser_recover.add_argument("--identity", help="identity mixing", action="store_true")
parser_recover.add_argument("--threshold", type=float, default=0.1)

# Create parser for the "invariance" command
parser_invariance = subparsers.add_parser(
    "invariance", parents=[common], help="subset rotations of a pathological basis"
)
parser_invariance.add_argument("-n", type=int, default=4)
parser_invariance.add_argument("-M", dest="m_tiles", type=int, default=2)
parser_invariance.add_argument("--trials", type=int, default=100)
parser_invariance.add_argument("--threshold", type=float, default=1e-9)

# Create parser for the "critical" command
parser_critical = subparsers.add_parser(
    "critical", parents=[common], help="single-row rotation scans"
)
parser_critical.add_argument("-n", type=int, default=4)
parser_critical.add_argument("-M", dest="m_tiles", type=int, default=2)
parser_critical.add_argument("--trials", type=int, default=20)
parser_critical.add_argument(
    "--eps-list",
    help="rotation angles (rad)",
    type=float,
    nargs="+",
    default=list(DEFAULT_EPS_LIST),
)
parser_critical.add_argument(
    "--random-basis", help="scan random bases (expected slope 1)", action="store_true"
)
parser_critical.add_argument("--tolerance", type=float, default=0.1)

# Create parser for the "gradprofile" command
parser_gradprofile = subparsers.add_parser(
    "gradprofile", parents=[common], help="angular gradients of the four costs"
)
parser_gradprofile.add_argument(
    "--region", choices=["near_zero", "near_one"], default="near_zero"
)
parser_gradprofile.add_argument("--samples", type=int, default=200)
parser_gradprofile.add_argument("--delta", type=float, default=1e-3)

# Create parser for the "gabors" command
parser_gabors = subparsers.add_parser(
    "gabors", parents=[common], help="Gabor fits of a basis CSV"
)
parser_gabors.add_argument("basis", help="basis CSV file")
parser_gabors.add_argument("--mse-threshold", type=float, default=0.5)
parser_gabors.add_argument("--min-fraction", type=float)

# Create parser for the "gradcheck" command
parser_gradcheck = subparsers.add_parser(
    "gradcheck", parents=[common], help="analytic gradients against finite differences"
)
parser_gradcheck.add_argument("--bases", type=int, default=50)
parser_gradcheck.add_argument("--max-k", type=int, default=32)
parser_gradcheck.add_argument("--max-n", type=int, default=16)
parser_gradcheck.add_argument("--step", type=float, default=1e-5)

# Create parser for the "texture" command
parser_texture = subparsers.add_parser(
    "texture", parents=[common], help="writes the synthetic texture as PGM"
)
parser_texture.add_argument("--size", type=int, default=512)
parser_texture.add_argument("--name", default="texture.pgm")

# Create parser for the "info" command
parser_info = subparsers.add_parser(
    "info", help="shows the content of a run archive"
)
parser_info.add_argument("archive_name", help="HDF5 run archive")
parser_info.add_argument("-v", "--verbose", action="store_true")


def run(args):
    """Dispatches parsed arguments to the subcommand. Returns the exit status."""
    if args.command is None:
        parser.print_help()
        return 2
    elif args.command == "info":
        return cmd_info(args.archive_name, args.verbose)
    config = ExperimentConfig.from_args(args)
    if args.command == "check2d":
        return cmd_check2d(config, args.grid_points, args.inject_error)
    elif args.command == "distribution":
        return cmd_distribution(
            config,
            args.init,
            args.k,
            args.n,
            args.m_tiles,
            args.sigma,
            args.mechanism,
            args.min_angle_above,
            args.min_angle_below,
        )
    elif args.command == "train":
        return cmd_train(
            config,
            args.image,
            args.patch_size,
            args.num_patches,
            args.k,
            args.whiten,
            args.floor,
            args.texture_size,
            args.fit_gabors,
            args.min_angle_above,
            args.gabor_fraction_above,
            args.gabor_mse,
        )
    elif args.command == "recover":
        return cmd_recover(config, args.n, args.m, args.identity, args.threshold)
    elif args.command == "invariance":
        return cmd_invariance(config, args.n, args.m_tiles, args.trials, args.threshold)
    elif args.command == "critical":
        return cmd_critical(
            config,
            args.n,
            args.m_tiles,
            args.trials,
            args.eps_list,
            args.random_basis,
            args.tolerance,
        )
    elif args.command == "gradprofile":
        return cmd_gradprofile(config, args.region, args.samples, args.delta)
    elif args.command == "gabors":
        return cmd_gabors(config, args.basis, args.mse_threshold, args.min_fraction)
    elif args.command == "gradcheck":
        return cmd_gradcheck(config, args.bases, args.max_k, args.max_n, args.step)
    elif args.command == "texture":
        return cmd_texture(config, args.size, args.name)
    parser.print_help()
    return 2


def main(argv=None):
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (OicaError, ValueError, OSError) as e:
        cprint.red("{:}: {:}".format(type(e).__name__, e))
        return 2


if __name__ == "__main__":
    sys.exit(main())
