import math

import numpy as np
import pytest

from sparsect.errors import DimensionMismatchError
from sparsect.geometry import Image
from sparsect.metrics import SSIM_SIGMA, SSIM_WINDOW, mae_rmse, psnr, ssim


def naive_psnr(x, ref, peak):
    total = 0.0
    h, w = x.shape
    for i in range(h):
        for j in range(w):
            total += (x[i, j] - ref[i, j]) ** 2
    return 10 * math.log10(peak**2 / (total / (h * w)))


def naive_ssim(x, ref, peak):
    """Scalar re-implementation: loop over every full window."""
    half = SSIM_WINDOW // 2
    w = np.empty((SSIM_WINDOW, SSIM_WINDOW))
    for i in range(SSIM_WINDOW):
        for j in range(SSIM_WINDOW):
            w[i, j] = math.exp(-((i - half) ** 2 + (j - half) ** 2) / (2 * SSIM_SIGMA**2))
    w /= w.sum()
    c1, c2 = (0.01 * peak) ** 2, (0.03 * peak) ** 2
    h, wd = x.shape
    vals = []
    for i in range(h - SSIM_WINDOW + 1):
        for j in range(wd - SSIM_WINDOW + 1):
            a = x[i : i + SSIM_WINDOW, j : j + SSIM_WINDOW]
            b = ref[i : i + SSIM_WINDOW, j : j + SSIM_WINDOW]
            mu_a = (w * a).sum()
            mu_b = (w * b).sum()
            va = (w * a * a).sum() - mu_a**2
            vb = (w * b * b).sum() - mu_b**2
            cov = (w * a * b).sum() - mu_a * mu_b
            vals.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a**2 + mu_b**2 + c1) * (va + vb + c2))
            )
    return float(np.mean(vals))


def test_psnr_identical_is_infinite():
    img = Image(np.ones((16, 16)))
    assert psnr(img, img, 1.0) == math.inf


def test_psnr_constant_difference_closed_form():
    a = Image(np.zeros((8, 8)))
    b = Image(np.full((8, 8), 0.5))
    assert psnr(a, b, 1.0) == pytest.approx(20 * math.log10(1 / 0.5), abs=1e-12)


def test_psnr_matches_naive_loop(rng):
    x = rng.random((20, 20))
    r = rng.random((20, 20))
    assert psnr(Image(x), Image(r), 1.0) == pytest.approx(naive_psnr(x, r, 1.0), abs=1e-10)


def test_psnr_symmetric(rng):
    x = Image(rng.random((12, 12)))
    r = Image(rng.random((12, 12)))
    assert psnr(x, r, 2.0) == psnr(r, x, 2.0)


def test_ssim_identical_is_one(rng):
    img = Image(rng.random((24, 24)))
    assert ssim(img, img, 1.0) == pytest.approx(1.0, abs=1e-14)


def test_ssim_contrast_flip_below_one(rng):
    base = rng.random((24, 24))
    assert ssim(Image(base), Image(-base), 1.0) < 1.0


def test_ssim_matches_naive_loop(rng):
    x = rng.random((20, 20))
    r = np.clip(x + 0.1 * rng.standard_normal((20, 20)), 0, 1)
    assert ssim(Image(x), Image(r), 1.0) == pytest.approx(naive_ssim(x, r, 1.0), abs=1e-8)


def test_ssim_symmetric(rng):
    x = Image(rng.random((16, 16)))
    r = Image(rng.random((16, 16)))
    assert ssim(x, r, 1.0) == pytest.approx(ssim(r, x, 1.0), abs=1e-14)


def test_ssim_rejects_small_images():
    with pytest.raises(DimensionMismatchError):
        ssim(Image(np.zeros((8, 8))), Image(np.zeros((8, 8))), 1.0)


def test_mae_rmse_trivial_cases():
    a = Image(np.zeros((6, 6)))
    assert mae_rmse(a, a) == (0.0, 0.0)
    b = Image(np.full((6, 6), -0.3))
    mae, rmse = mae_rmse(a, b)
    assert mae == pytest.approx(0.3, abs=1e-15)
    assert rmse == pytest.approx(0.3, abs=1e-15)


def test_rmse_at_least_mae(rng):
    for _ in range(20):
        x = Image(rng.standard_normal((10, 10)))
        r = Image(rng.standard_normal((10, 10)))
        mae, rmse = mae_rmse(x, r)
        assert rmse >= mae


def test_translation_invariance(rng):
    x = rng.random((10, 10))
    r = rng.random((10, 10))
    m1 = mae_rmse(Image(x), Image(r))
    m2 = mae_rmse(Image(x + 5.0), Image(r + 5.0))
    assert m1 == pytest.approx(m2, abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        psnr(Image(np.zeros((4, 4))), Image(np.zeros((5, 5))), 1.0)
    with pytest.raises(DimensionMismatchError):
        mae_rmse(Image(np.zeros((4, 4))), Image(np.zeros((5, 4))))


def test_peak_validation(rng):
    img = Image(rng.random((16, 16)))
    with pytest.raises(ValueError):
        psnr(img, img, 0.0)
    with pytest.raises(ValueError):
        ssim(img, img, -1.0)
