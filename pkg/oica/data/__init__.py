"""Data (:mod:`oica.data`)
========================

Data matrices are n×m arrays with one sample per column.

Natural-image experiments extract square patches from a grayscale image
(8 or 16-bit PGM files are read with OpenCV, or the bundled synthetic
texture is used) and whiten them. The synthetic-source path generates
Laplacian sources and a random mixing for recovery checks, measured by the
Amari index.

.. autofunction:: extract_patches

.. autofunction:: read_pgm

.. autofunction:: write_pgm

.. autofunction:: synthetic_texture

.. autoclass:: WhiteningTransform
   :members:

.. autofunction:: fit_whitening

.. autofunction:: synth_sources

.. autofunction:: amari_index

.. autofunction:: permutation_error

"""

from collections import namedtuple
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.linalg
import cv2

from oica.core import (
    ImageTooSmall,
    RankDeficient,
    ShapeMismatch,
    Singular,
    random_rotation,
)

__all__ = [
    "extract_patches",
    "read_pgm",
    "write_pgm",
    "synthetic_texture",
    "WhiteningKind",
    "WhiteningTransform",
    "fit_whitening",
    "SyntheticSources",
    "synth_sources",
    "amari_index",
    "permutation_error",
    "DEFAULT_RELATIVE_FLOOR",
]

DEFAULT_RELATIVE_FLOOR = 1e-4


def extract_patches(image, patch_size, count, seed=None):
    """Square patches at uniform random positions, flattened row-major.

    :param image: 2D grayscale image
    :type image: :class:`numpy.ndarray`
    :param patch_size: side of the patches, in pixels
    :type patch_size: int
    :param count: number of patches
    :type count: int
    :param seed: random seed of the positions
    :raises ImageTooSmall: if the image is smaller than a patch
    :return: patch_size² × count data matrix
    :rtype: :class:`numpy.ndarray`
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ShapeMismatch("Expected a 2D grayscale image, got shape {:}".format(image.shape))
    if patch_size < 1 or count < 1:
        raise ValueError("patch_size and count must be ≥ 1")
    height, width = image.shape
    if height < patch_size or width < patch_size:
        raise ImageTooSmall(
            "Image {:d}×{:d} is smaller than the {:d}×{:d} patches".format(
                height, width, patch_size, patch_size
            )
        )
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, height - patch_size + 1, size=count)
    cols = rng.integers(0, width - patch_size + 1, size=count)
    data = np.empty((patch_size * patch_size, count))
    for j, (r, c) in enumerate(zip(rows, cols)):
        data[:, j] = image[r : r + patch_size, c : c + patch_size].ravel()
    return data


def read_pgm(path):
    """Reads an 8 or 16-bit grayscale PGM image as floats (raw values)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    image = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if image is None:
        raise OSError("Cannot decode image file {:}".format(path))
    if image.ndim != 2:
        raise ShapeMismatch("Only grayscale images are supported")
    return image.astype(float)


def write_pgm(path, image):
    """Writes an image with values in [0, 1] as a 16-bit PGM file."""
    image = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    data = np.round(image * 65535.0).astype(np.uint16)
    if not cv2.imwrite(str(path), data):
        raise OSError("Cannot write image file {:}".format(path))


# envelope standard deviations (pixels) and frequencies (cycles per pixel) of
# the texture atoms
_ATOM_WIDTHS = (1.0, 2.5)
_ATOM_FREQS = (0.08, 0.3)


def synthetic_texture(size=256, seed=None, density=0.02, noise_weight=0.0):
    """Grayscale texture made of sparse, randomly placed Gabor atoms with
    Laplacian amplitudes, optionally plus 1/f noise, rescaled to [0, 1].

    Atoms have random orientations and phases, frequencies log-uniform in
    [0.08, 0.3] cycles per pixel and envelope widths in [1, 2.5] pixels, so
    small patches are sparse mixtures of localized, oriented features. It is
    the bundled image source of the training pipeline.

    :param size: side of the square image, in pixels
    :param seed: random seed
    :param density: mean number of atoms per pixel
    :param noise_weight: weight of the 1/f noise, relative to the atoms
    :rtype: :class:`numpy.ndarray`
    """
    if size < 2:
        raise ValueError("size must be ≥ 2")
    if not density > 0 or not noise_weight >= 0:
        raise ValueError("density must be > 0 and noise_weight ≥ 0")
    rng = np.random.default_rng(seed)
    radius = int(np.ceil(3.0 * _ATOM_WIDTHS[1]))
    padded = size + 2 * radius
    canvas = np.zeros((padded + 2 * radius, padded + 2 * radius))
    dy, dx = np.mgrid[-radius : radius + 1, -radius : radius + 1].astype(float)
    count = rng.poisson(density * padded * padded)
    for _ in range(count):
        cx, cy = rng.uniform(0.0, padded, 2)
        ix, iy = int(cx), int(cy)
        x, y = dx + ix - cx, dy + iy - cy
        angle = rng.uniform(0.0, np.pi)
        u = x * np.cos(angle) + y * np.sin(angle)
        v = -x * np.sin(angle) + y * np.cos(angle)
        width_u, width_v = rng.uniform(*_ATOM_WIDTHS, 2)
        freq = np.exp(rng.uniform(*np.log(_ATOM_FREQS)))
        atom = np.exp(-(u * u) / (2.0 * width_u ** 2) - (v * v) / (2.0 * width_v ** 2))
        atom *= np.cos(2.0 * np.pi * freq * u + rng.uniform(0.0, 2.0 * np.pi))
        canvas[iy : iy + 2 * radius + 1, ix : ix + 2 * radius + 1] += rng.laplace() * atom
    image = canvas[2 * radius : 2 * radius + size, 2 * radius : 2 * radius + size]

    if noise_weight > 0:
        fy = np.fft.fftfreq(size)[:, None]
        fx = np.fft.fftfreq(size)[None, :]
        f = np.hypot(fx, fy)
        f[0, 0] = 1.0
        spectrum = np.fft.fft2(rng.standard_normal((size, size))) / f
        spectrum[0, 0] = 0.0
        noise = np.real(np.fft.ifft2(spectrum))
        noise *= np.std(image) / max(np.std(noise), 1e-300)
        image = image + noise_weight * noise

    image = image - image.min()
    span = image.max()
    return image / span if span > 0 else image


class WhiteningKind(Enum):
    PCA = "pca"
    ZCA = "zca"


@dataclass
class WhiteningTransform:
    """Affine whitening ``x ↦ matrix (x − mean)``.

    :param mean: n-vector subtracted from the samples (global centering)
    :param matrix: n×n whitening matrix
    :param kind: PCA (rows are scaled principal axes) or ZCA (rotated back
        to the input axes, symmetric matrix)
    :param floor: absolute eigenvalue floor that was added to the
        covariance eigenvalues
    :param eigenvalues: covariance eigenvalues, descending
    :param floored: number of eigenvalues below the floor
    """

    mean: np.ndarray
    matrix: np.ndarray
    kind: WhiteningKind
    floor: float
    eigenvalues: np.ndarray = None
    floored: int = 0

    @property
    def dims(self):
        return self.matrix.shape[0]

    def apply(self, data):
        """Whitens an n×m data matrix."""
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[0] != self.dims:
            raise ShapeMismatch(
                "Data of shape {:} does not match a {:d}-dimensional whitening".format(
                    data.shape, self.dims
                )
            )
        return self.matrix @ (data - self.mean[:, None])

    def __call__(self, data):
        return self.apply(data)


def fit_whitening(data, kind="zca", floor=None):
    """Fits a whitening transform on an n×m data matrix.

    The data are centered, the (biased, 1/m) covariance is diagonalized and
    every axis is scaled by ``1/√(eigenvalue + floor)``.

    :param data: n×m data, one sample per column
    :type data: :class:`numpy.ndarray`
    :param kind: "pca" or "zca"
    :type kind: str or :class:`WhiteningKind`
    :param floor: absolute eigenvalue floor; None means 1e-4 times the
        largest eigenvalue
    :type floor: float, optional
    :raises RankDeficient: if m ≤ n, or if more than n/2 eigenvalues are below
        the floor, or if an axis cannot be scaled (zero eigenvalue and zero
        floor)
    :rtype: :class:`WhiteningTransform`
    """
    kind = WhiteningKind(kind) if isinstance(kind, str) else kind
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ShapeMismatch("Expected an n×m data matrix")
    n, m = data.shape
    if m <= n:
        raise RankDeficient(
            "{:d} samples are not enough to whiten {:d} dimensions".format(m, n)
        )
    if not np.all(np.isfinite(data)):
        raise ValueError("Data contain non-finite values")
    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    cov = centered @ centered.T / m
    eigenvalues, vectors = scipy.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    eigenvalues = np.maximum(eigenvalues, 0.0)
    if floor is None:
        floor = DEFAULT_RELATIVE_FLOOR * eigenvalues[0]
    if floor < 0:
        raise ValueError("The eigenvalue floor must be ≥ 0")
    floored = int(np.count_nonzero(eigenvalues < floor))
    if floored > n / 2:
        raise RankDeficient(
            "{:d} of {:d} covariance eigenvalues are below the floor {:g}".format(
                floored, n, floor
            )
        )
    denominators = eigenvalues + floor
    if np.any(denominators <= 0):
        raise RankDeficient("Zero covariance eigenvalue with a zero floor")
    pca = vectors.T / np.sqrt(denominators)[:, None]
    matrix = vectors @ pca if kind is WhiteningKind.ZCA else pca
    return WhiteningTransform(mean, matrix, kind, float(floor), eigenvalues, floored)


SyntheticSources = namedtuple("SyntheticSources", ["sources", "mixing", "data"])


def synth_sources(n, m, seed=None, mixing=None):
    """Laplacian sources S (n×m), random mixing A and data X = A S.

    The random mixing is ``U diag(s) Vᵀ`` with random rotations U, V and
    singular values s in [1, 10], so its condition number is below 10.

    :param mixing: n×n mixing to use instead of a random one
    :type mixing: :class:`numpy.ndarray`, optional
    :rtype: SyntheticSources(sources, mixing, data)
    """
    if n < 2 or m < 1:
        raise ValueError("Need n ≥ 2 and m ≥ 1")
    rng = np.random.default_rng(seed)
    sources = rng.laplace(0.0, 1.0, size=(n, m))
    if mixing is None:
        u = random_rotation(n, rng)
        v = random_rotation(n, rng)
        s = np.exp(rng.uniform(0.0, np.log(10.0), size=n))
        mixing = (u * s) @ v.T
    else:
        mixing = np.asarray(mixing, dtype=float)
        if mixing.shape != (n, n):
            raise ShapeMismatch("The mixing matrix must be {:d}×{:d}".format(n, n))
    return SyntheticSources(sources, mixing, mixing @ sources)


def amari_index(unmixing, mixing, whitening=None):
    """Normalized Amari error of ``P = W V A``, in [0, 1].

    The rows of P are first scaled to unit largest magnitude, so that the
    index does not depend on the row norms of W. It is 0 if and only if P is
    a scaled permutation matrix.

    :param unmixing: n×n unmixing W
    :param mixing: n×n mixing A
    :param whitening: whitening V applied between A and W, as a matrix or a
        :class:`WhiteningTransform`
    :raises Singular: if P is not invertible
    :rtype: float
    """
    w = np.asarray(unmixing, dtype=float)
    a = np.asarray(mixing, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape != a.shape:
        raise ShapeMismatch("W and A must be square matrices of the same size")
    if whitening is not None:
        v = whitening.matrix if isinstance(whitening, WhiteningTransform) else whitening
        a = np.asarray(v, dtype=float) @ a
    p = w @ a
    if not np.all(np.isfinite(p)) or np.linalg.cond(p) > 1e12:
        raise Singular("W·A is not invertible")
    return permutation_error(p)


def permutation_error(p):
    """Normalized Amari error of any square matrix without a zero row
    (singular matrices included)."""
    p = np.abs(np.asarray(p, dtype=float))
    n = p.shape[0]
    if p.ndim != 2 or p.shape[1] != n:
        raise ShapeMismatch("Expected a square matrix")
    if n < 2:
        return 0.0
    if np.any(p.max(axis=1) == 0):
        raise Singular("Zero row")
    p = p / p.max(axis=1, keepdims=True)
    rows = np.sum(p.sum(axis=1) - 1.0)
    cols = np.sum(p.sum(axis=0) / p.max(axis=0) - 1.0)
    return float((rows + cols) / (2.0 * n * (n - 1)))
