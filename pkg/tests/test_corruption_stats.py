"""Statistical behavior of the randomized operators on megapixel images."""

import numpy as np

from kpbench.corruption import ops

MID_GRAY = 128


def test_gaussian_noise_residual_statistics():
    img = np.full((1000, 1000, 3), MID_GRAY, np.uint8)
    out = ops.gaussian_noise(img, 6.0, 1.0, seed=20240601)
    residual = out.astype(np.float64) - img.astype(np.float64)
    assert 5.90 <= residual.std() <= 6.10
    assert -0.05 <= residual.mean() <= 0.05


def test_gaussian_noise_gain_scales_residual():
    img = np.full((500, 500, 3), MID_GRAY, np.uint8)
    out = ops.gaussian_noise(img, 3.0, 2.0, seed=77)
    residual = out.astype(np.float64) - img.astype(np.float64)
    assert 5.85 <= residual.std() <= 6.15


def test_impulse_noise_exact_replacement_count():
    img = np.full((1000, 1000, 3), MID_GRAY, np.uint8)
    out = ops.impulse_noise(img, 27, seed=31337)
    positions, values = ops._impulse_positions(27, 1000, 1000, 31337)
    assert len(positions) == 270000
    assert len(np.unique(positions)) == 270000  # without replacement

    changed = np.any(out != img, axis=2).ravel()
    assert changed.sum() == 270000  # mid-gray: every selected pixel changes
    expected = np.zeros(1000 * 1000, dtype=bool)
    expected[positions] = True
    assert np.array_equal(changed, expected)
    assert np.array_equal(out.reshape(-1, 3)[positions], np.repeat(values[:, None], 3, axis=1))


def test_impulse_noise_black_white_balance():
    img = np.full((1000, 1000, 3), MID_GRAY, np.uint8)
    out = ops.impulse_noise(img, 27, seed=5)
    flat = out.reshape(-1, 3)
    black = (flat == 0).all(axis=1).sum()
    white = (flat == 255).all(axis=1).sum()
    assert black + white == 270000
    # 50/50 within 5 sigma of binomial noise
    assert abs(black - 135000) < 5 * np.sqrt(270000 * 0.25)


def test_color_quant_distinct_value_bound_megapixel():
    rng = np.random.default_rng(8)
    img = rng.integers(0, 256, (1000, 1000, 3)).astype(np.uint8)
    for bits in (1, 2, 5):
        out = ops.color_quant(img, bits)
        for ch in range(3):
            assert len(np.unique(out[..., ch])) <= 2**bits
