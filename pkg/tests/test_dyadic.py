"""Dyadic partition: profiles, block multipliers, splits, dilation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lpcns import (
    DyadicPartition,
    GridSpec,
    RealField,
    SpectralField,
    inverse,
    random_band_limited,
    resolvable_range,
    spectral_dilate,
    transform,
)
from lpcns.dyadic import COLLAR, dealias_mask, eta_profile, psi_profile

TWO_PI = 2.0 * np.pi


# ----------------------------------------------------------- radial profiles


def test_eta_profile_plateau_and_support():
    r = np.array([0.0, 0.5, 1.0, 1.005, 1.01, 2.0])
    eta = eta_profile(r)
    assert_allclose(eta[:3], 1.0)
    assert 0.0 < eta[3] < 1.0
    assert_allclose(eta[4:], 0.0)


def test_eta_profile_monotone():
    r = np.linspace(0.99, 1.02, 400)
    assert np.all(np.diff(eta_profile(r)) <= 0.0)


def test_psi_profile_support_and_plateau():
    r = np.array([0.5, 1.0, 1.005, 1.01, 1.5, 2.0, 2.01, 2.02, 3.0])
    psi = psi_profile(r)
    assert psi[0] == 0.0 and psi[1] == 0.0  # closed support starts past 1
    assert psi[2] > 0.0
    assert_allclose(psi[3:6], 1.0)  # plateau on [1.01, 2]
    assert 0.0 < psi[6] < 1.0
    assert_allclose(psi[7:], 0.0)


def test_psi_telescopes_to_one():
    # Σ_k ψ(2^{−k} r) = 1 for r > 0 once the ladder covers the point.
    r = np.geomspace(0.1, 50.0, 300)
    total = sum(psi_profile(np.ldexp(r, -k)) for k in range(-8, 12))
    assert_allclose(total, 1.0, atol=1e-14)


# --------------------------------------------------------- resolvable range


@pytest.mark.parametrize(
    "d, n, L, expected",
    [
        (3, 32, TWO_PI, (0, 4)),
        (3, 16, TWO_PI, (0, 3)),
        (1, 64, TWO_PI, (0, 5)),
        (1, 64, 2 * TWO_PI, (-1, 4)),
        (2, 8, np.pi, (1, 3)),
    ],
)
def test_resolvable_range(d, n, L, expected):
    assert resolvable_range(GridSpec(d, n, L)) == expected


# ------------------------------------------------------- partition of unity


def test_partition_defect_small(grid3_32):
    part = DyadicPartition(grid3_32)
    assert part.partition_defect() < 1e-10


def test_blocks_sum_to_one_off_zero_mode(grid3):
    part = DyadicPartition(grid3)
    total = sum(part.block_multiplier(k) for k in part.k_list)
    nz = grid3.rho > 0
    assert_allclose(total[nz], 1.0, atol=1e-12)
    assert total[0, 0, 0] == 0.0


def test_block_supports(grid3_32):
    part = DyadicPartition(grid3_32)
    rho = grid3_32.rho
    for k in part.k_list[1:-1]:
        m = part.block_multiplier(k)
        assert np.all(m[(rho <= 2.0**k) | (rho > COLLAR * 2.0 ** (k + 1))] == 0.0)
    # Edge lumping: the bottom block absorbs everything below its octave,
    # the top block everything above (Nyquist corners included).
    bottom = part.block_multiplier(part.k_min)
    nz = rho > 0
    low_modes = nz & (rho <= 2.0**part.k_min)
    assert_allclose(bottom[low_modes], 1.0)
    top = part.block_multiplier(part.k_max)
    assert_allclose(top[rho > COLLAR * 2.0**part.k_max], 1.0)


def test_block_multiplier_range_check(grid3):
    part = DyadicPartition(grid3)
    for k in (part.k_min - 1, part.k_max + 1):
        with pytest.raises(ValueError, match="outside resolvable range"):
            part.block_multiplier(k)


def test_block_reconstruction(grid3, rng):
    part = DyadicPartition(grid3)
    fh = transform(random_band_limited(grid3, rng, zero_mean=False))
    total = sum(part.block(fh, k).coef for k in part.k_list)
    mean = np.zeros_like(fh.coef)
    mean[(0,) + (0,) * grid3.d] = fh.coef[(0,) + (0,) * grid3.d]
    assert_allclose(total + mean, fh.coef, atol=1e-12 * np.max(np.abs(fh.coef)))


# ------------------------------------------------------------ low-pass sums


def test_lowpass_partial_sums(grid3):
    part = DyadicPartition(grid3)
    mean_only = np.zeros(grid3.shape)
    mean_only[0, 0, 0] = 1.0
    running = mean_only.copy()
    for j in range(part.k_min, part.k_max + 2):
        assert_allclose(part.lowpass_multiplier(j), running, atol=1e-12)
        if j <= part.k_max:
            running = running + part.block_multiplier(j)
    assert_allclose(part.lowpass_multiplier(part.k_max + 1), 1.0)
    assert_allclose(part.lowpass_multiplier(part.k_min - 5), mean_only)


def test_split_low_high(grid3, rng):
    part = DyadicPartition(grid3, k0=2)
    fh = transform(random_band_limited(grid3, rng, zero_mean=False))
    low, high = part.split_low_high(fh)
    assert_allclose(low.coef + high.coef, fh.coef, rtol=0, atol=0)
    # The mean rides with the low part.
    assert_allclose(high.mean(), 0.0, atol=1e-13)
    assert low.mean() == pytest.approx(fh.mean())
    # Low part dies past its collar, high part below its floor.
    rho = grid3.rho
    assert np.all(low.coef[:, rho > COLLAR * 2.0**part.k0] == 0.0)
    assert np.all(np.abs(high.coef[:, (rho <= 2.0**part.k0) & (rho > 0)]) == 0.0)


def test_default_and_invalid_k0(grid3):
    part = DyadicPartition(grid3)
    assert part.k0 == part.k_max - 3
    with pytest.raises(ValueError, match="outside admissible"):
        DyadicPartition(grid3, k0=part.k_max + 2)
    with pytest.raises(ValueError, match="outside admissible"):
        DyadicPartition(grid3, k0=part.k_min - 1)


def test_tilde_multiplier_covers_block(grid3_32):
    part = DyadicPartition(grid3_32)
    for j in part.k_list[1:-1]:
        blk = part.block_multiplier(j)
        window = part.tilde_multiplier(j)
        assert_allclose((window - 1.0) * blk, 0.0, atol=1e-12)


# ---------------------------------------------------------------- dealiasing


def test_dealias_mask_two_thirds_rule():
    grid = GridSpec(1, 16, TWO_PI)
    mask = dealias_mask(grid)
    f = grid._int_freq
    assert np.array_equal(mask, np.abs(f) <= 16 / 3.0)
    assert mask.sum() == 11  # integers −5..5


def test_dealias_mask_is_tensor_product():
    grid = GridSpec(2, 16, TWO_PI)
    m1 = dealias_mask(GridSpec(1, 16, TWO_PI))
    assert np.array_equal(dealias_mask(grid), np.outer(m1, m1))


# ------------------------------------------------------------------ dilation


def test_dilate_moves_single_mode():
    grid = GridSpec(3, 16, TWO_PI)
    coef = np.zeros((1,) + grid.shape, complex)
    coef[0, 1, 0, 0] = 1.0
    coef[0, -1, 0, 0] = 1.0  # Hermitian partner
    out = spectral_dilate(SpectralField(grid, coef))
    assert out.coef[0, 2, 0, 0] == 1.0
    assert out.coef[0, -2, 0, 0] == 1.0
    assert np.count_nonzero(out.coef) == 2


def test_dilate_is_coordinate_doubling():
    grid = GridSpec(2, 32, TWO_PI)
    x = grid.coords()[0]
    f = RealField(grid, np.broadcast_to(np.cos(3 * x), grid.shape).copy())
    out = inverse(spectral_dilate(transform(f)))
    assert_allclose(out.samples[0], np.broadcast_to(np.cos(6 * x), grid.shape), atol=1e-12)


def test_dilate_two_steps(grid3, rng):
    fh = transform(random_band_limited(grid3, rng, rho_max_frac=0.2))
    once_twice = spectral_dilate(spectral_dilate(fh))
    both = spectral_dilate(fh, steps=2)
    assert_allclose(once_twice.coef, both.coef, atol=0, rtol=0)
    assert once_twice.hermitian_defect() < 1e-12


def test_dilate_rejects_wide_spectrum():
    grid = GridSpec(1, 16, TWO_PI)
    coef = np.zeros((1, 16), complex)
    coef[0, 4] = 1.0  # |f| = n/4 is already too wide
    coef[0, -4] = 1.0
    with pytest.raises(ValueError, match="push modes past the lattice"):
        spectral_dilate(SpectralField(grid, coef))


def test_dilate_ignores_rounding_dust():
    grid = GridSpec(1, 16, TWO_PI)
    coef = np.zeros((1, 16), complex)
    coef[0, 1] = 1.0
    coef[0, -1] = 1.0
    coef[0, 7] = 1e-14  # transform round-trip noise out of band
    out = spectral_dilate(SpectralField(grid, coef))
    assert out.coef[0, 2] == 1.0
    assert out.coef[0, 7] == 0.0


def test_dilate_rejects_bad_steps(grid3, rng):
    fh = transform(random_band_limited(grid3, rng, rho_max_frac=0.2))
    with pytest.raises(ValueError, match="steps"):
        spectral_dilate(fh, steps=0)
