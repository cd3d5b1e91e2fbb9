"""Linearized propagator: eigenvalues, scalar kernels, symbol, Duhamel march."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from lpcns import (
    GreenSymbol,
    GridSpec,
    LameParams,
    SpectralField,
    apply_green,
    eigenvalues,
    green_scalars,
    inverse,
    phi1,
    phi2,
    random_band_limited,
    solve_linear_duhamel,
    transform,
)
from lpcns.semigroup import divided_difference, probe_symbol, probe_symbol_residual

TWO_PI = 2.0 * np.pi


def generator_matrix(xi, params):
    """Dense per-mode generator: continuity row plus viscous/pressure rows."""
    xi = np.asarray(xi, float)
    d = xi.size
    rho2 = xi @ xi
    L = np.zeros((1 + d, 1 + d), complex)
    L[0, 1:] = -1j * xi
    L[1:, 0] = -1j * params.gamma * xi
    L[1:, 1:] = -params.mu * rho2 * np.eye(d) - (params.mu + params.lam) * np.outer(xi, xi)
    return L


# ------------------------------------------------------------------- params


def test_lame_params_validation():
    assert LameParams().nu == 1.0
    assert LameParams(2.0, 1.0).nu == 5.0
    with pytest.raises(ValueError, match="shear viscosity"):
        LameParams(mu=0.0)
    with pytest.raises(ValueError, match=r"2\*mu \+ lambda"):
        LameParams(mu=1.0, lam=-2.0)
    with pytest.raises(ValueError, match="pressure slope"):
        LameParams(gamma=-1.0)


# -------------------------------------------------------------- eigenvalues


def test_eigenvalues_frozen_points():
    ev = eigenvalues(1.0)
    assert ev.lam_plus == pytest.approx(-0.5 + 0.8660254037844386j, abs=1e-14)
    assert ev.lam_minus == pytest.approx(-0.5 - 0.8660254037844386j, abs=1e-14)
    ev = eigenvalues(2.0 * np.sqrt(2.0))
    assert ev.lam_plus == pytest.approx(-1.1715728752538097, abs=1e-12)
    assert ev.lam_minus == pytest.approx(-6.828427124746192, abs=1e-12)
    ev = eigenvalues(2.0)  # the degenerate crossover for unit nu, gamma
    assert ev.lam_plus == pytest.approx(-2.0, abs=1e-14)
    assert ev.lam_minus == pytest.approx(-2.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(rho=st.floats(min_value=0.01, max_value=12.0))
def test_eigenvalue_sum_and_product(rho):
    params = LameParams(0.8, -0.5, 1.7)
    ev = eigenvalues(rho, params)
    assert ev.lam_plus + ev.lam_minus == pytest.approx(-params.nu * rho**2, rel=1e-10)
    assert ev.lam_plus * ev.lam_minus == pytest.approx(params.gamma * rho**2, rel=1e-10)


def test_eigenvalue_branches():
    # Conjugate pair below the crossover, real and ordered above it.
    below = eigenvalues(1.5)
    assert below.lam_plus.imag > 0
    assert below.lam_minus == pytest.approx(np.conj(below.lam_plus))
    above = eigenvalues(3.0)
    assert above.lam_plus.imag == 0 and above.lam_minus.imag == 0
    assert above.lam_minus.real < above.lam_plus.real < 0


def test_probe_symbol_is_minus_twice_eigenvalue():
    rho = np.array([0.0, 0.3, 1.0, 1.9, 2.0, 2.5, 4.0])
    ev = eigenvalues(rho)
    assert_allclose(probe_symbol(rho, "plus"), -2.0 * ev.lam_plus, atol=1e-13)
    assert_allclose(probe_symbol(rho, "minus"), -2.0 * ev.lam_minus, atol=1e-13)


def test_probe_symbol_residual_is_parabolic_near_zero():
    rho = np.array([0.0, 0.5, 1.0, 1.9])
    h = probe_symbol_residual(rho, "plus")
    assert_allclose(h.real, rho**2, atol=1e-13)  # exact below the crossover
    small = np.array([1e-3, 1e-2, 1e-1])
    assert_allclose(probe_symbol_residual(small, "plus").imag, small**3 / 4.0, rtol=0.01)


# ------------------------------------------------------------ phi functions


def test_phi_frozen_values():
    assert complex(phi1(np.array(-0.4))) == pytest.approx(0.8241998849109017, abs=1e-15)
    assert complex(phi2(np.array(-0.4))) == pytest.approx(0.43950028772274585, abs=1e-15)
    assert complex(phi1(np.array(0.0))) == pytest.approx(1.0)
    assert complex(phi2(np.array(0.0))) == pytest.approx(0.5)


def test_phi_recurrence_across_branch_switch():
    # phi1(z) = 1 + z·phi2(z), straddling the series/direct threshold.
    z = np.array([-2.0, -0.3, -0.15, -0.1, -1e-6, 0.05, 0.3, 2.0], complex)
    assert_allclose(phi1(z), 1.0 + z * phi2(z), rtol=1e-13, atol=1e-15)


def test_divided_difference_frozen_values():
    dd = divided_difference("exp", np.array(-0.3), np.array(-0.5))
    assert complex(dd) == pytest.approx(0.6714378048454223, abs=1e-15)
    equal = divided_difference("exp", np.array(-0.4), np.array(-0.4))
    assert complex(equal) == pytest.approx(np.exp(-0.4), abs=1e-15)


def test_divided_difference_stability_and_symmetry():
    za, zb = np.array(-1.3), np.array(-1.3 + 1e-12)
    dd = divided_difference("exp", za, zb)
    # Naive (e^a − e^b)/(a − b) would lose ~12 digits here.
    assert complex(dd) == pytest.approx(np.exp(-1.3), rel=1e-10)
    a, b = np.array(-0.2 + 0.9j), np.array(-1.1 - 0.4j)
    assert_allclose(
        divided_difference("exp", a, b), divided_difference("exp", b, a), rtol=1e-13
    )
    assert_allclose(
        divided_difference("exp", a, b), (np.exp(a) - np.exp(b)) / (a - b), rtol=1e-12
    )


def test_divided_difference_unknown_function():
    with pytest.raises(KeyError):
        divided_difference("cosh", np.array(0.1), np.array(0.2))


# ------------------------------------------------------------ green scalars


def test_green_scalars_identity_at_time_zero():
    rho = np.array([0.0, 0.5, 2.0, 5.0])
    d1, d2, d3 = green_scalars(rho, 0.0)
    assert_allclose(d1, 1.0, atol=1e-14)
    assert_allclose(d2, 0.0, atol=1e-14)
    assert_allclose(d3, 1.0, atol=1e-14)


def test_green_scalars_degenerate_closed_form():
    # At the crossover the kernel collapses to e^{−2t}(1+2t), −t·e^{−2t},
    # e^{−2t}(1−2t); the divided-difference path must hit it exactly.
    t = 0.3
    d1, d2, d3 = green_scalars(2.0, t)
    e = np.exp(-2.0 * t)
    assert float(d1) == pytest.approx(e * (1.0 + 2.0 * t), rel=1e-12)
    assert float(d2) == pytest.approx(-t * e, rel=1e-12)
    assert float(d3) == pytest.approx(e * (1.0 - 2.0 * t), rel=1e-12)


def test_green_scalars_match_naive_formula_away_from_crossover():
    t = 0.7
    for rho in (0.6, 1.0, 3.5):
        lam_p, lam_m = eigenvalues(rho)
        gap = lam_p - lam_m
        d1, d2, d3 = green_scalars(rho, t)
        assert complex(d1) == pytest.approx(
            (lam_p * np.exp(lam_m * t) - lam_m * np.exp(lam_p * t)) / gap, rel=1e-11
        )
        assert complex(d2) == pytest.approx(
            (np.exp(lam_m * t) - np.exp(lam_p * t)) / gap, rel=1e-11
        )
        assert complex(d3) == pytest.approx(
            (lam_p * np.exp(lam_p * t) - lam_m * np.exp(lam_m * t)) / gap, rel=1e-11
        )


# ------------------------------------------------------------ dense symbol


XIS = [
    np.array([1.0, 0.0, 0.0]),
    np.array([0.0, 2.0, 0.0]),  # |ξ| at the crossover
    np.array([1.0, -2.0, 2.0]),
    np.array([0.3, 0.4, -1.2]),
]


@pytest.mark.parametrize("t", [0.1, 0.75])
@pytest.mark.parametrize(
    "params", [LameParams(), LameParams(0.7, -0.2, 2.0)], ids=["default", "stiff"]
)
def test_matrix_against_dense_exponential(t, params):
    sym = GreenSymbol(GridSpec(3, 8, TWO_PI), t, params)
    for xi in XIS:
        expected = scipy.linalg.expm(t * generator_matrix(xi, params))
        assert_allclose(sym.matrix_at(xi), expected, atol=1e-10)


def test_matrix_at_zero_mode_is_identity():
    sym = GreenSymbol(GridSpec(3, 8, TWO_PI), 1.3)
    assert_allclose(sym.matrix_at(np.zeros(3)), np.eye(4), atol=1e-14)


def test_semigroup_property_dense():
    grid = GridSpec(3, 8, TWO_PI)
    for xi in XIS:
        g_s = GreenSymbol(grid, 0.4).matrix_at(xi)
        g_t = GreenSymbol(grid, 0.9).matrix_at(xi)
        g_st = GreenSymbol(grid, 1.3).matrix_at(xi)
        assert_allclose(g_s @ g_t, g_st, atol=1e-10)


def test_apply_matches_matrix_on_single_mode():
    grid = GridSpec(2, 16, TWO_PI)
    coef = np.zeros((3,) + grid.shape, complex)
    vec = np.array([0.7 + 0.1j, -0.3, 1.1 - 0.6j])
    coef[:, 2, 5] = vec
    out = GreenSymbol(grid, 0.5).apply(SpectralField(grid, coef))
    xi = np.array([2.0, 5.0])
    expected = GreenSymbol(grid, 0.5).matrix_at(xi) @ vec
    assert_allclose(out.coef[:, 2, 5], expected, atol=1e-12)


def test_apply_green_stays_real_and_contracts(grid3, rng):
    stacked = transform(random_band_limited(grid3, rng, ncomp=4))
    out = apply_green(stacked, 0.8)
    assert out.hermitian_defect() < 1e-9
    e0 = np.sum(np.abs(stacked.coef) ** 2)
    assert np.sum(np.abs(out.coef) ** 2) <= e0


def test_apply_validates_component_count(grid3, rng):
    with pytest.raises(ValueError, match="components"):
        GreenSymbol(grid3, 0.1).apply(transform(random_band_limited(grid3, rng)))


# ---------------------------------------------------------------- Duhamel


def test_duhamel_zero_forcing_is_exact_propagation(rng):
    grid = GridSpec(1, 32, TWO_PI)
    state0 = transform(random_band_limited(grid, rng, ncomp=2))
    path = solve_linear_duhamel(state0, None, T=1.0, steps=4)
    assert len(path) == 5
    for i, (t, state) in enumerate(path):
        assert t == pytest.approx(0.25 * i)
        expected = apply_green(state0, t) if t > 0 else state0
        assert_allclose(state.coef, expected.coef, atol=1e-12 * np.max(np.abs(state0.coef)))


def test_duhamel_rejects_bad_steps(rng):
    grid = GridSpec(1, 8, TWO_PI)
    state0 = transform(random_band_limited(grid, rng, ncomp=2))
    with pytest.raises(ValueError, match="steps"):
        solve_linear_duhamel(state0, None, 1.0, 0)


def test_duhamel_constant_forcing_against_integral_oracle(rng):
    """Check against expm of the augmented block matrix on one mode."""
    grid = GridSpec(1, 8, TWO_PI)
    params = LameParams()
    coef = np.zeros((2,) + grid.shape, complex)
    coef[:, 3] = [0.4, -0.2 + 0.5j]
    force = np.zeros_like(coef)
    force[:, 3] = [0.1j, 0.9]
    state0 = SpectralField(grid, coef)

    T = 0.5
    final = solve_linear_duhamel(state0, lambda t: force, T, steps=4096)[-1][1]

    L = generator_matrix(np.array([3.0]), params)
    aug = np.zeros((4, 4), complex)
    aug[:2, :2] = L
    aug[:2, 2:] = np.eye(2)
    big = scipy.linalg.expm(T * aug)
    expected = big[:2, :2] @ coef[:, 3] + big[:2, 2:] @ force[:, 3]
    assert_allclose(final.coef[:, 3], expected, atol=1e-7)


def test_duhamel_second_order_in_time(rng):
    grid = GridSpec(1, 16, TWO_PI)
    state0 = transform(random_band_limited(grid, rng, ncomp=2))
    force0 = transform(random_band_limited(grid, rng, ncomp=2)).coef

    def forcing(t):
        return np.sin(3.0 * t) * force0

    ref = solve_linear_duhamel(state0, forcing, 1.0, 1024)[-1][1].coef
    errs = []
    for steps in (16, 32, 64):
        got = solve_linear_duhamel(state0, forcing, 1.0, steps)[-1][1].coef
        errs.append(np.max(np.abs(got - ref)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8) and np.all(orders < 2.3)
