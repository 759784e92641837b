import numpy as np
import pytest
import cv2
from scipy import stats

from oica.core import ImageTooSmall, RankDeficient, ShapeMismatch, Singular
from oica.data import (
    WhiteningKind,
    amari_index,
    extract_patches,
    fit_whitening,
    permutation_error,
    read_pgm,
    synth_sources,
    synthetic_texture,
    write_pgm,
)


def _ramp(height=20, width=30):
    r, c = np.mgrid[0:height, 0:width]
    return 100.0 * r + c


def test_extract_patches():
    image = _ramp()
    data = extract_patches(image, 4, 50, seed=0)
    assert data.shape == (16, 50)
    for column in data.T:
        patch = column.reshape(4, 4)
        r, c = divmod(patch[0, 0], 100.0)
        assert np.array_equal(patch, image[int(r) : int(r) + 4, int(c) : int(c) + 4])
    assert np.array_equal(data, extract_patches(image, 4, 50, seed=0))


def test_extract_patches_errors():
    with pytest.raises(ImageTooSmall):
        extract_patches(np.zeros((7, 20)), 8, 10)
    with pytest.raises(ShapeMismatch):
        extract_patches(np.zeros((10, 10, 3)), 4, 10)
    with pytest.raises(ValueError):
        extract_patches(np.zeros((10, 10)), 4, 0)
    data = extract_patches(np.ones((8, 8)), 8, 3)
    assert np.array_equal(data, np.ones((64, 3)))


def test_pgm_files(tmp_path):
    image = np.linspace(0.0, 1.0, 48).reshape(6, 8)
    path = tmp_path / "image.pgm"
    write_pgm(path, image)
    assert np.array_equal(read_pgm(path), np.round(image * 65535.0))

    eight_bits = tmp_path / "small.pgm"
    cv2.imwrite(str(eight_bits), np.arange(12, dtype=np.uint8).reshape(3, 4))
    assert np.array_equal(read_pgm(eight_bits), np.arange(12.0).reshape(3, 4))

    colour = tmp_path / "colour.ppm"
    cv2.imwrite(str(colour), np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ShapeMismatch):
        read_pgm(colour)

    with pytest.raises(FileNotFoundError):
        read_pgm(tmp_path / "missing.pgm")
    garbage = tmp_path / "garbage.pgm"
    garbage.write_text("not an image")
    with pytest.raises(OSError):
        read_pgm(garbage)


def test_synthetic_texture():
    image = synthetic_texture(64, seed=1)
    assert image.shape == (64, 64)
    assert image.min() == 0.0
    assert image.max() == pytest.approx(1.0)
    assert np.array_equal(image, synthetic_texture(64, seed=1))
    assert not np.array_equal(image, synthetic_texture(64, seed=2))


def test_synthetic_texture_is_sparse():
    # sparse atoms give heavy-tailed pixels, Gaussian 1/f noise dilutes them
    sparse = stats.kurtosis(synthetic_texture(256, seed=0).ravel())
    noisy = stats.kurtosis(synthetic_texture(256, seed=0, noise_weight=3.0).ravel())
    assert sparse > 1.0
    assert noisy < sparse
    with pytest.raises(ValueError):
        synthetic_texture(64, density=0.0)
    with pytest.raises(ValueError):
        synthetic_texture(64, noise_weight=-1.0)


def test_whitening_diagonal_covariance():
    """

    Covariance diag(4, 1): ZCA scales the axes by 1/2 and 1

    """

    a, b = 2.0 * np.sqrt(2.0), np.sqrt(2.0)
    data = np.array([[a, -a, 0.0, 0.0], [0.0, 0.0, b, -b]])
    zca = fit_whitening(data, "zca", floor=0.0)
    assert zca.kind is WhiteningKind.ZCA
    assert np.allclose(zca.matrix, np.diag([0.5, 1.0]), atol=1e-12)
    assert np.allclose(zca.eigenvalues, [4.0, 1.0])
    pca = fit_whitening(data, "pca", floor=0.0)
    assert np.allclose(np.abs(pca.matrix), np.diag([0.5, 1.0]), atol=1e-12)


def test_whitened_covariance_is_identity():
    rng = np.random.default_rng(0)
    mixing = rng.standard_normal((5, 5))
    data = mixing @ rng.standard_normal((5, 2000)) + 3.0
    for kind in ("pca", "zca"):
        white = fit_whitening(data, kind, floor=0.0)(data)
        assert np.max(np.abs(white.mean(axis=1))) < 1e-10
        assert np.max(np.abs(white @ white.T / 2000 - np.eye(5))) < 1e-10

    zca = fit_whitening(data, "zca", floor=0.0)
    refit = fit_whitening(zca(data), "zca", floor=0.0)
    assert np.max(np.abs(refit.matrix - np.eye(5))) < 1e-6
    assert np.allclose(zca.matrix, zca.matrix.T)


def test_whitening_default_floor():
    rng = np.random.default_rng(1)
    data = rng.standard_normal((4, 500)) * np.array([[10.0], [1.0], [1.0], [1.0]])
    white = fit_whitening(data)
    assert white.floor == pytest.approx(1e-4 * white.eigenvalues[0])
    assert white.floored == 0


def test_whitening_errors():
    rng = np.random.default_rng(2)
    with pytest.raises(RankDeficient):
        fit_whitening(rng.standard_normal((4, 4)))
    rank_one = np.outer(rng.standard_normal(4), rng.standard_normal(100))
    with pytest.raises(RankDeficient):
        fit_whitening(rank_one)
    with pytest.raises(ValueError):
        fit_whitening(rng.standard_normal((2, 10)), floor=-1.0)
    white = fit_whitening(rng.standard_normal((3, 50)))
    with pytest.raises(ShapeMismatch):
        white.apply(np.zeros((2, 5)))


def test_synth_sources():
    sources = synth_sources(4, 1000, seed=0)
    assert sources.sources.shape == (4, 1000)
    assert np.allclose(sources.data, sources.mixing @ sources.sources)
    assert np.linalg.cond(sources.mixing) <= 10.0 + 1e-9
    identity = synth_sources(3, 10, seed=0, mixing=np.eye(3))
    assert np.array_equal(identity.data, identity.sources)
    with pytest.raises(ShapeMismatch):
        synth_sources(3, 10, mixing=np.eye(2))
    with pytest.raises(ValueError):
        synth_sources(1, 10)


def test_amari_index():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4))
    assert amari_index(np.eye(4), np.eye(4)) == 0.0
    scaled_permutation = np.diag([2.0, -1.0, 0.5, 3.0])[[2, 0, 3, 1]]
    assert amari_index(scaled_permutation @ np.linalg.inv(a), a) < 1e-12
    assert 0.0 < amari_index(rng.standard_normal((4, 4)), a) <= 1.0
    v = rng.standard_normal((4, 4))
    w = rng.standard_normal((4, 4))
    assert amari_index(w, a, whitening=v) == pytest.approx(amari_index(w @ v, a))
    with pytest.raises(Singular):
        amari_index(np.ones((2, 2)), np.eye(2))
    with pytest.raises(ShapeMismatch):
        amari_index(np.eye(2), np.eye(3))


def test_permutation_error():
    assert permutation_error(np.ones((2, 2))) == pytest.approx(1.0)
    assert permutation_error([[5.0]]) == 0.0
    assert permutation_error(np.eye(3)[[1, 2, 0]]) == 0.0
    with pytest.raises(Singular):
        permutation_error([[1.0, 0.0], [0.0, 0.0]])


def test_synth_sources_are_laplacian():
    sources = synth_sources(3, 100000, seed=4).sources
    # standard Laplace: excess kurtosis 3
    assert np.allclose(stats.kurtosis(sources, axis=1), 3.0, atol=0.3)
    assert stats.kstest(sources[0], "laplace").pvalue > 1e-3
