"""Grid containers, FFT plumbing, norms, and differential operators."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from lpcns import (
    GridSpec,
    RealField,
    SpectralField,
    divergence,
    gradient,
    inverse,
    leray_project,
    lp_norm,
    random_band_limited,
    transform,
)
from lpcns.grid import apply_multiplier, l2_norm_spectral, scalar_multiplier

TWO_PI = 2.0 * np.pi


def cosine_field(grid, axis=0, amplitude=1.0):
    x = grid.coords()[axis]
    return RealField(grid, np.broadcast_to(amplitude * np.cos(x), grid.shape).copy())


# ---------------------------------------------------------------- GridSpec


@pytest.mark.parametrize(
    "d, n, L, msg",
    [
        (4, 16, 1.0, "dimension must be 1, 2 or 3"),
        (0, 16, 1.0, "dimension must be 1, 2 or 3"),
        (3, 3, 1.0, "even and >= 4"),
        (3, 2, 1.0, "even and >= 4"),
        (3, 15, 1.0, "even and >= 4"),
        (3, 16, 0.0, "positive and finite"),
        (3, 16, -1.0, "positive and finite"),
        (3, 16, np.inf, "positive and finite"),
    ],
)
def test_gridspec_rejects_bad_parameters(d, n, L, msg):
    with pytest.raises(ValueError, match=msg):
        GridSpec(d, n, L)


def test_gridspec_geometry():
    grid = GridSpec(3, 16, TWO_PI)
    assert grid.shape == (16, 16, 16)
    assert grid.dx == pytest.approx(TWO_PI / 16)
    assert grid.cell_volume == pytest.approx((TWO_PI / 16) ** 3)
    assert grid.volume == pytest.approx(TWO_PI**3)
    assert grid.xi_min == pytest.approx(1.0)
    # On the 2π box the frequencies are the integer lattice.
    xi0 = grid.xi(0).ravel()
    assert_allclose(np.sort(xi0), np.arange(-8, 8), atol=1e-14)
    assert grid.rho[0, 0, 0] == 0.0
    assert grid.rho_max == pytest.approx(np.sqrt(3) * 8.0)


def test_frequencies_scale_with_box():
    # Doubling L halves every frequency: xi = 2π·integer/L.
    g1 = GridSpec(2, 16, TWO_PI)
    g2 = GridSpec(2, 16, 2 * TWO_PI)
    assert_allclose(g2.xi(0), g1.xi(0) / 2.0)
    assert g2.xi_min == pytest.approx(0.5)


# ------------------------------------------------------------- transforms


@settings(max_examples=20, deadline=None)
@given(
    d=st.integers(min_value=1, max_value=3),
    n=st.sampled_from([4, 8, 16]),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_transform_roundtrip(d, n, seed):
    grid = GridSpec(d, n, TWO_PI)
    rng = np.random.default_rng(seed)
    f = RealField(grid, rng.standard_normal((2,) + grid.shape))
    back = inverse(transform(f))
    assert_allclose(back.samples, f.samples, atol=1e-12, rtol=0)


def test_transform_zero_mode_is_lattice_sum(grid3, rng):
    f = RealField(grid3, rng.standard_normal(grid3.shape))
    fh = transform(f)
    zero = fh.coef[(0,) + (0,) * grid3.d]
    assert zero.real == pytest.approx(f.samples.sum(), rel=1e-12)
    assert abs(zero.imag) < 1e-9
    assert_allclose(fh.mean(), f.mean(), atol=1e-14)


def test_hermitian_defect(grid3, rng):
    f = RealField(grid3, rng.standard_normal(grid3.shape))
    assert transform(f).hermitian_defect() < 1e-10
    # A one-sided complex exponential is maximally non-Hermitian.
    coef = np.zeros(grid3.shape, complex)
    coef[1, 0, 0] = 1.0
    assert SpectralField(grid3, coef).hermitian_defect() == pytest.approx(1.0)


def test_fields_reject_nonfinite(grid3):
    bad = np.zeros(grid3.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="NaN or Inf"):
        RealField(grid3, bad)
    badc = np.zeros(grid3.shape, complex)
    badc[0, 0, 0] = np.inf
    with pytest.raises(ValueError, match="NaN or Inf"):
        SpectralField(grid3, badc)


def test_component_axis_shapes(grid3, rng):
    flat = rng.standard_normal(grid3.shape)
    assert RealField(grid3, flat).ncomp == 1
    stacked = rng.standard_normal((3,) + grid3.shape)
    assert RealField(grid3, stacked).ncomp == 3
    with pytest.raises(ValueError, match="does not fit grid shape"):
        RealField(grid3, rng.standard_normal((16, 16)))


# ------------------------------------------------------------------ norms

# Closed forms on the 2π box: ∫|cos|^2 = π per axis pair, ∫cos^4 = 3π/4.
COS_NORMS = {
    2.0: 11.136655993663416,  # (½·(2π)³)^{1/2}
    4.0: 3.105579978638571,  # (⅜·(2π)³)^{1/4}
    np.inf: 1.0,
}


@pytest.mark.parametrize("p", sorted(COS_NORMS))
def test_lp_norm_closed_form(p):
    grid = GridSpec(3, 32, TWO_PI)
    f = cosine_field(grid)
    # Trig polynomials of degree ≤ 4 are integrated exactly by the lattice.
    assert lp_norm(f, p) == pytest.approx(COS_NORMS[p], rel=1e-13)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(min_value=0.1, max_value=100.0), p=st.sampled_from([1.0, 2.0, 3.0, np.inf]))
def test_lp_norm_homogeneous(c, p):
    grid = GridSpec(2, 16, TWO_PI)
    f = cosine_field(grid)
    g = cosine_field(grid, amplitude=c)
    assert lp_norm(g, p) == pytest.approx(c * lp_norm(f, p), rel=1e-10)


def test_lp_norm_uses_euclidean_magnitude():
    grid = GridSpec(2, 16, TWO_PI)
    x = grid.coords()[0]
    comp = np.broadcast_to(np.cos(x), grid.shape)
    f = RealField(grid, np.stack([3.0 * comp, 4.0 * comp]))
    assert lp_norm(f, np.inf) == pytest.approx(5.0)


def test_lp_norm_rejects_nonpositive_p(grid3, rng):
    f = RealField(grid3, rng.standard_normal(grid3.shape))
    with pytest.raises(ValueError, match="must be positive"):
        lp_norm(f, 0.0)


def test_l2_norm_spectral_parseval(grid3, rng):
    f = RealField(grid3, rng.standard_normal((3,) + grid3.shape))
    assert l2_norm_spectral(transform(f)) == pytest.approx(lp_norm(f, 2.0), rel=1e-12)


# -------------------------------------------------------------- operators


def test_gradient_of_cosine_exact():
    grid = GridSpec(3, 16, TWO_PI)
    grad = inverse(gradient(transform(cosine_field(grid))))
    x = grid.coords()[0]
    assert_allclose(grad.samples[0], np.broadcast_to(-np.sin(x), grid.shape), atol=1e-12)
    assert_allclose(grad.samples[1:], 0.0, atol=1e-13)


def test_divergence_of_gradient_is_laplacian():
    grid = GridSpec(3, 16, TWO_PI)
    fh = transform(cosine_field(grid))
    lap = inverse(divergence(gradient(fh)))
    # |ξ| = 1 carrier: Δcos = −cos.
    assert_allclose(lap.samples, -cosine_field(grid).samples, atol=1e-12)


def test_operator_component_checks(grid3, rng):
    vec = transform(RealField(grid3, rng.standard_normal((3,) + grid3.shape)))
    scal = transform(RealField(grid3, rng.standard_normal(grid3.shape)))
    with pytest.raises(ValueError, match="scalar"):
        gradient(vec)
    with pytest.raises(ValueError, match="expects 3 components"):
        divergence(scal)
    with pytest.raises(ValueError, match="expects 3 components"):
        leray_project(scal)


def test_leray_projector_identities(grid3, rng):
    u = transform(random_band_limited(grid3, rng, ncomp=3))
    sol = leray_project(u, "solenoidal")
    pot = leray_project(u, "potential")
    assert_allclose(sol.coef + pot.coef, u.coef, atol=1e-12)
    # P is idempotent and annihilates the potential part.
    assert_allclose(leray_project(sol).coef, sol.coef, atol=1e-12)
    assert np.max(np.abs(divergence(sol).coef)) < 1e-10 * np.max(np.abs(u.coef))
    assert np.max(np.abs(leray_project(pot).coef)) < 1e-10 * np.max(np.abs(u.coef))


def test_leray_kills_gradients(grid3):
    g = gradient(transform(cosine_field(grid3)))
    assert np.max(np.abs(leray_project(g).coef)) < 1e-12
    assert_allclose(leray_project(g, "potential").coef, g.coef, atol=1e-12)


def test_leray_unknown_part(grid3, rng):
    u = transform(RealField(grid3, rng.standard_normal((3,) + grid3.shape)))
    with pytest.raises(ValueError, match="unknown part"):
        leray_project(u, "rotational")


# ------------------------------------------------------------ multipliers


def test_scalar_multiplier_at_zero(grid3):
    m = scalar_multiplier(grid3, lambda r: 1.0 / r**2, at_zero=0.0)
    assert m[0, 0, 0] == 0.0
    assert np.isfinite(m).all()
    with pytest.raises(ValueError, match="singular"):
        scalar_multiplier(grid3, lambda r: 1.0 / r**2)


def test_apply_multiplier_rejects_nonfinite(grid3, rng):
    fh = transform(RealField(grid3, rng.standard_normal(grid3.shape)))
    bad = np.ones(grid3.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="zero-mode value"):
        apply_multiplier(fh, bad)


def test_heat_multiplier_damps_l2(grid3, rng):
    fh = transform(random_band_limited(grid3, rng))
    m = np.exp(-grid3.rho2)
    assert l2_norm_spectral(apply_multiplier(fh, m)) <= l2_norm_spectral(fh)


# ------------------------------------------------------------ random data


def test_random_band_limited_support_and_normalization(grid3_32):
    rng = np.random.default_rng(7)
    f = random_band_limited(grid3_32, rng, rho_max_frac=0.25, amplitude=2.5)
    nyq = np.pi * grid3_32.n / grid3_32.L
    fh = transform(f)
    outside = grid3_32.rho > 0.25 * nyq
    assert np.max(np.abs(fh.coef[0][outside])) < 1e-8 * np.max(np.abs(fh.coef))
    assert np.max(f.magnitude()) == pytest.approx(2.5, rel=1e-12)
    assert_allclose(f.mean(), 0.0, atol=1e-13)


def test_random_band_limited_deterministic(grid3):
    f1 = random_band_limited(grid3, np.random.default_rng(42), ncomp=3)
    f2 = random_band_limited(grid3, np.random.default_rng(42), ncomp=3)
    assert np.array_equal(f1.samples, f2.samples)
    assert f1.ncomp == 3
