import time

import numpy as np
import pytest

from oica.core import ConstantPatch, FitDiverged, ShapeMismatch
from oica.gabor import (
    FIT_COLUMNS,
    GaborFitConfig,
    GaborParams,
    fit_basis,
    fit_gabor,
    gabor_kernel,
    normalized_mse,
)


def _angle_error_deg(a, b):
    """Distance between two orientations, modulo π, in degrees."""
    d = np.mod(a - b, np.pi)
    return np.degrees(min(d, np.pi - d))


def _reference(**kwargs):
    values = dict(
        center=(7.5, 7.2),
        rotation=np.radians(30.0),
        phase=0.4,
        frequency=0.15,
        var_par=9.0,
        var_perp=12.0,
    )
    values.update(kwargs)
    return GaborParams(**values)


def test_params_validation():
    with pytest.raises(ValueError):
        _reference(frequency=0.0)
    with pytest.raises(ValueError):
        _reference(var_perp=-1.0)
    with pytest.raises(ValueError):
        gabor_kernel(_reference(center=(40.0, 2.0)), 8)


def test_kernel_examples():
    """

    Odd kernel vanishes at its center; zero frequency gives the envelope

    """

    odd = _reference(center=(7.0, 7.0), phase=np.pi / 2)
    assert abs(gabor_kernel(odd, 16)[7, 7]) < 1e-12

    flat = _reference(center=(7.0, 7.0), frequency=1e-12, phase=0.0, rotation=0.0)
    y, x = np.mgrid[0:16, 0:16]
    envelope = np.exp(-((x - 7.0) ** 2) / 18.0 - (y - 7.0) ** 2 / 24.0)
    assert np.max(np.abs(gabor_kernel(flat, 16) - envelope)) < 1e-12


def test_kernel_axes():
    # x is the column index, the oscillation runs along x for φ = 0
    p = _reference(center=(3.0, 4.0), rotation=0.0, phase=0.0, var_par=1e6, var_perp=1e6)
    kernel = gabor_kernel(p, 10)
    for d in range(5):
        assert kernel[4, 3 + d] == pytest.approx(np.cos(2 * np.pi * 0.15 * d), abs=1e-4)
    assert np.allclose(kernel[:, 3], kernel[4, 3], atol=1e-4)


def test_kernel_half_turn_symmetry():
    p = _reference()
    flipped = _reference(rotation=p.rotation + np.pi, phase=-p.phase)
    assert np.max(np.abs(gabor_kernel(p, 16) - gabor_kernel(flipped, 16))) < 1e-12


def test_canonical():
    p = _reference(rotation=np.radians(200.0), phase=1.0, amplitude=-2.0)
    c = p.canonical()
    assert c.amplitude == 2.0
    assert 0.0 <= c.rotation < np.pi
    assert -np.pi < c.phase <= np.pi
    assert np.max(np.abs(gabor_kernel(p, 16) - gabor_kernel(c, 16))) < 1e-12
    assert c.as_row()[2] == pytest.approx(20.0)


def test_normalized_mse():
    kernel = gabor_kernel(_reference(), 16)
    assert normalized_mse(kernel, kernel) == pytest.approx(0.0, abs=1e-12)
    assert normalized_mse(3.0 * kernel, -kernel) == pytest.approx(0.0, abs=1e-12)
    assert normalized_mse(kernel, np.zeros_like(kernel)) == 1.0
    a = np.zeros((2, 2))
    a[0, 0] = 1.0
    b = np.zeros((2, 2))
    b[1, 1] = 1.0
    assert normalized_mse(a, b) == 2.0


def test_fit_round_trip():
    true = _reference()
    params, mse = fit_gabor(gabor_kernel(true, 16))
    assert mse < 1e-3
    assert params.frequency == pytest.approx(0.15, rel=0.05)
    assert _angle_error_deg(params.rotation, true.rotation) < 3.0
    assert np.hypot(params.center[0] - 7.5, params.center[1] - 7.2) < 0.5
    assert params.phase == pytest.approx(0.4, abs=0.05)
    assert params.amplitude == pytest.approx(1.0, rel=0.05)


def test_fit_with_noise():
    true = _reference()
    rng = np.random.default_rng(0)
    patch = gabor_kernel(true, 16) + 0.05 * rng.standard_normal((16, 16))
    params, mse = fit_gabor(patch)
    assert params.frequency == pytest.approx(0.15, rel=0.1)


def test_fit_pure_noise():
    rng = np.random.default_rng(3)
    try:
        params, mse = fit_gabor(rng.standard_normal((16, 16)))
    except FitDiverged:
        return
    assert mse >= 0.8


def test_fit_scale_invariance():
    patch = gabor_kernel(_reference(center=(4.2, 3.6), var_par=4.0, var_perp=5.0), 8)
    p1, mse1 = fit_gabor(patch)
    p10, mse10 = fit_gabor(10.0 * patch)
    assert mse10 == pytest.approx(mse1, abs=1e-6)
    assert p10.frequency == pytest.approx(p1.frequency, rel=1e-4)
    assert _angle_error_deg(p10.rotation, p1.rotation) < 1e-2
    assert p10.amplitude == pytest.approx(10.0 * p1.amplitude, rel=1e-4)


def test_fit_config_validation():
    with pytest.raises(ValueError):
        GaborFitConfig(refined=0)
    with pytest.raises(ValueError):
        GaborFitConfig(final_evals=0)
    with pytest.raises(ValueError):
        GaborFitConfig(tol=0.0)


def test_fit_errors():
    with pytest.raises(ConstantPatch):
        fit_gabor(np.full((8, 8), 0.3))
    with pytest.raises(ShapeMismatch):
        fit_gabor(np.ones((8, 6)))
    with pytest.raises(ValueError):
        fit_gabor(np.full((8, 8), np.nan))


def test_fit_basis(tmp_path):
    good = gabor_kernel(_reference(center=(3.5, 3.5), var_par=3.0, var_perp=4.0), 8)
    basis = np.vstack([good.ravel(), np.full(64, 0.125), -good.ravel()])
    result = fit_basis(basis, workers=1)
    assert result.status == ["ok", "constant", "ok"]
    assert np.isnan(result.mse[1])
    assert result.fraction_below(0.5) == pytest.approx(2.0 / 3.0)
    table = result.table()
    assert table.shape == (3, len(FIT_COLUMNS))
    assert np.all(np.isnan(table[1, 2:]))
    assert np.array_equal(table[:, 0], [0, 1, 2])

    path = tmp_path / "gabors.csv"
    result.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(FIT_COLUMNS)
    assert len(lines) == 4

    with pytest.raises(ShapeMismatch):
        fit_basis(np.ones((2, 10)))


@pytest.mark.slow
def test_fit_many_random_gabors():
    """

    Refits of 100 random noiseless Gabor kernels, within five minutes

    """

    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    mse = []
    recovered = 0
    for _ in range(100):
        true = GaborParams(
            center=tuple(rng.uniform(5.0, 11.0, 2)),
            rotation=rng.uniform(0.0, np.pi),
            phase=rng.uniform(-np.pi, np.pi),
            frequency=rng.uniform(0.12, 0.3),
            var_par=rng.uniform(8.0, 16.0),
            var_perp=rng.uniform(8.0, 16.0),
        )
        params, error = fit_gabor(gabor_kernel(true, 16))
        mse.append(error)
        if (
            abs(params.frequency / true.frequency - 1.0) < 0.05
            and _angle_error_deg(params.rotation, true.rotation) < 3.0
        ):
            recovered += 1
    assert np.median(mse) < 0.02
    assert recovered == 100
    assert time.perf_counter() - start < 300.0
