"""Block-weighted norms, time-integrated variants, the hybrid functionals."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from lpcns import (
    BesovIndex,
    DyadicPartition,
    GridSpec,
    IndexPair,
    NormTracker,
    RealField,
    besov_norm,
    block_lp_norms,
    chemin_lerner_norm,
    chemin_lerner_running,
    hybrid_X_norm,
    hybrid_Y_norm,
    lp_norm,
    random_band_limited,
    spectral_dilate,
    transform,
    validate_index_pair,
    x0_norm,
)
from lpcns.besov import A_HIGH, LOW_PAIR, M_HIGH, M_LOW, U_HIGH, hardy_norm, time_quadrature

TWO_PI = 2.0 * np.pi

# Degree-3 carrier: strictly inside the second octave (2, 4.04) of the ladder.
COS3_L2 = 11.136655993663416  # (½·(2π)³)^{1/2}
COS3_L4 = 3.105579978638571  # (⅜·(2π)³)^{1/4}


def carrier_field(grid, freq):
    phase = sum(f * x for f, x in zip(freq, grid.coords()))
    return RealField(grid, np.broadcast_to(np.cos(phase), grid.shape).copy())


# ------------------------------------------------------------- index checks


def test_besov_index_validation():
    BesovIndex(-1.0, 2.0, np.inf)  # fine
    with pytest.raises(ValueError, match="p must be in"):
        BesovIndex(0.0, 0.5)
    with pytest.raises(ValueError, match="r must be in"):
        BesovIndex(0.0, 2.0, 0.0)


@pytest.mark.parametrize("q, p", [(2.0, 2.0), (2.0, 4.0), (3.0, 5.0), (2.0, 3.0), (4.0, 4.0)])
def test_admissible_pairs(q, p):
    ok, why = validate_index_pair(q, p)
    assert ok and why is None
    IndexPair(q, p).validated()


@pytest.mark.parametrize(
    "q, p, why",
    [
        (2.0, 1.5, "2 <= p"),
        (2.0, 6.0, "p < 6"),
        (1.5, 2.0, "2 <= q"),
        (4.0, 3.0, "q <= p"),
        (2.0, 5.0, "p <= 2q"),
        (5.0, 5.0, "1 < 2/q + 3/p"),
    ],
)
def test_inadmissible_pairs(q, p, why):
    ok, msg = validate_index_pair(q, p)
    assert not ok and why in msg
    with pytest.raises(ValueError, match="rejected"):
        IndexPair(q, p).validated()


# ------------------------------------------------------- single-mode norms


def test_block_norms_localize_single_mode(grid3_32):
    part = DyadicPartition(grid3_32)
    fh = transform(carrier_field(grid3_32, (3, 0, 0)))
    norms = block_lp_norms(fh, 2.0, part)
    idx = part.k_list.index(1)
    assert norms[idx] == pytest.approx(COS3_L2, rel=1e-12)
    others = np.delete(norms, idx)
    assert np.max(others) < 1e-12 * norms[idx]


@pytest.mark.parametrize(
    "p, value", [(2.0, COS3_L2), (4.0, COS3_L4), (np.inf, 1.0)]
)
@pytest.mark.parametrize("s", [-1.0, 0.0, 0.75])
def test_besov_norm_single_mode_closed_form(grid3_32, s, p, value):
    fh = transform(carrier_field(grid3_32, (3, 0, 0)))
    # One active block at k = 1, so the norm is 2^s times the block norm.
    assert besov_norm(fh, BesovIndex(s, p)) == pytest.approx(2.0**s * value, rel=1e-11)


def test_besov_block_sum_exponents(grid3_32):
    f = carrier_field(grid3_32, (3, 0, 0))
    g = carrier_field(grid3_32, (0, 6, 0))  # second carrier, one octave up
    fh = transform(RealField(grid3_32, f.samples + g.samples))
    n1 = n2 = COS3_L2  # same amplitude, same closed form on the 2π box
    assert besov_norm(fh, BesovIndex(0.0, 2.0, 1.0)) == pytest.approx(n1 + n2, rel=1e-11)
    assert besov_norm(fh, BesovIndex(0.0, 2.0, 2.0)) == pytest.approx(
        np.hypot(n1, n2), rel=1e-11
    )
    assert besov_norm(fh, BesovIndex(0.0, 2.0, np.inf)) == pytest.approx(n1, rel=1e-11)
    # s-weighting separates the two octaves.
    assert besov_norm(fh, BesovIndex(1.0, 2.0, np.inf)) == pytest.approx(4 * n2, rel=1e-11)


@pytest.mark.parametrize("s, p", [(0.0, 2.0), (-1.0, 2.0), (0.5, np.inf), (1.0, 4.0)])
def test_besov_dilation_law(s, p):
    """Doubling every frequency scales the (s,p,r) norm by exactly 2^s.

    On the periodic box x ↦ f(2x) wraps the domain twice, so every Lᵖ
    norm is preserved and only the block weights shift (no −d/p factor,
    unlike the whole-space dilation identity).
    """
    grid = GridSpec(3, 32, TWO_PI)
    f = carrier_field(grid, (3, 0, 0))
    g = carrier_field(grid, (0, 6, 0))
    fh = transform(RealField(grid, f.samples + 0.35 * g.samples))
    idx = BesovIndex(s, p, 1.0)
    expected = 2.0**s * besov_norm(fh, idx)
    assert besov_norm(spectral_dilate(fh), idx) == pytest.approx(expected, rel=1e-10)


def test_vector_blocks_use_euclidean_magnitude(grid3_32):
    f = carrier_field(grid3_32, (3, 0, 0)).samples[0]
    fh = transform(RealField(grid3_32, np.stack([3.0 * f, 4.0 * f, np.zeros_like(f)])))
    assert besov_norm(fh, BesovIndex(0.0, np.inf)) == pytest.approx(5.0, rel=1e-11)


def test_hardy_norm_single_block_equals_l1(grid3_32):
    # One active block: the square function collapses to |Δ̇_k f|.
    f = carrier_field(grid3_32, (3, 0, 0))
    assert hardy_norm(transform(f)) == pytest.approx(lp_norm(f, 1.0), rel=1e-10)


@settings(max_examples=10, deadline=None)
@given(c=st.floats(min_value=1e-3, max_value=1e3))
def test_norm_homogeneity(c):
    grid = GridSpec(3, 16, TWO_PI)
    f = random_band_limited(grid, np.random.default_rng(5))
    fh = transform(f)
    ch = transform(RealField(grid, c * f.samples))
    idx = BesovIndex(-0.5, 4.0)
    assert besov_norm(ch, idx) == pytest.approx(c * besov_norm(fh, idx), rel=1e-9)
    assert hardy_norm(ch) == pytest.approx(c * hardy_norm(fh), rel=1e-9)


# ------------------------------------------------------ time-integrated norms


def test_time_quadrature_constant_values():
    times = np.linspace(0.0, 4.0, 33)
    vals = np.full((33, 2), 3.0)
    assert_allclose(time_quadrature(times, vals, 1.0), 12.0, rtol=1e-12)
    assert_allclose(time_quadrature(times, vals, 2.0), 6.0, rtol=1e-12)
    assert_allclose(time_quadrature(times, vals, np.inf), 3.0)
    with pytest.raises(ValueError, match="misaligned"):
        time_quadrature(times[:5], vals, 1.0)


def test_chemin_lerner_hand_computed():
    times = np.array([0.0, 1.0, 2.0])
    vals = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    k_list = [0, 1]
    # rho = 1: trapezoids 6 and 8, weights 2^{k·1} → 6 + 16
    assert chemin_lerner_norm(times, vals, k_list, 1.0, 1.0) == pytest.approx(22.0)
    # rho = inf: suprema 5 and 6 → 5 + 12
    assert chemin_lerner_norm(times, vals, k_list, 1.0, np.inf) == pytest.approx(17.0)
    running = chemin_lerner_running(times, vals, k_list, 1.0, 1.0)
    assert_allclose(running, [0.0, 2.0 + 2 * 3.0, 22.0])


@pytest.mark.parametrize("rho", [1.0, 2.0, np.inf])
def test_running_norm_matches_prefixes(rho, rng):
    times = np.sort(rng.uniform(0.0, 2.0, size=9))
    vals = rng.uniform(0.0, 1.0, size=(9, 4))
    k_list = [-1, 0, 1, 2]
    running = chemin_lerner_running(times, vals, k_list, -0.5, rho)
    for i in (0, 3, 8):
        prefix = chemin_lerner_norm(times[: i + 1], vals[: i + 1], k_list, -0.5, rho)
        assert running[i] == pytest.approx(prefix, rel=1e-12, abs=1e-12)
    assert running[-1] == pytest.approx(
        chemin_lerner_norm(times, vals, k_list, -0.5, rho), rel=1e-12
    )


# ------------------------------------------------------------------ tracker


def test_tracker_round_trips(grid3, rng):
    part = DyadicPartition(grid3)
    tracker = NormTracker()
    fh = transform(random_band_limited(grid3, rng))
    for t in (0.0, 0.5, 1.0):
        tracker.record_field("a", t, fh, 2.0, part)
        tracker.record_scalar("mass", t, 7.0)
    times, mat, k_list, p = tracker.series("a")
    assert_allclose(times, [0.0, 0.5, 1.0])
    assert mat.shape == (3, len(part.k_list))
    assert k_list == part.k_list and p == 2.0
    assert_allclose(mat[0], block_lp_norms(fh, 2.0, part))
    st_, sv = tracker.scalar_series("mass")
    assert_allclose(sv, 7.0)
    assert tracker.chemin_lerner("a", 0.0, np.inf) == pytest.approx(
        chemin_lerner_norm(times, mat, k_list, 0.0, np.inf)
    )
    t_i, v_i = tracker.instantaneous("a", 0.0)
    assert v_i[0] == pytest.approx(besov_norm(fh, BesovIndex(0.0, 2.0), part))


def test_tracker_guards(grid3, rng):
    part = DyadicPartition(grid3)
    tracker = NormTracker()
    fh = transform(random_band_limited(grid3, rng))
    tracker.record_field("a", 0.0, fh, 2.0, part)
    with pytest.raises(ValueError, match="different exponent"):
        tracker.record_field("a", 0.1, fh, 4.0, part)
    with pytest.raises(ValueError, match="goes backwards"):
        tracker.record_field("a", -1.0, fh, 2.0, part)
    with pytest.raises(KeyError, match="no series"):
        tracker.series("missing")


# -------------------------------------------------------- hybrid functionals


def constant_tracker(values, T=1.0, samples=9):
    """One block at k = 0, constant in time: every 2^{ks} weight is 1."""
    tracker = NormTracker()
    for t in np.linspace(0.0, T, samples):
        for label, v in values.items():
            tracker.record_blocks(label, t, 4.0 if "high" in label else 2.0, [0], np.array([v]))
    return tracker


def test_hybrid_x_norm_closed_form():
    tracker = constant_tracker({LOW_PAIR: 2.0, A_HIGH: 3.0, U_HIGH: 5.0})
    # Constant v on [0,1]: L^inf→v, L²→v, L¹→v per term.
    expected = 2.0 * 3 + 3.0 * 2 + 5.0 * 2
    assert hybrid_X_norm(tracker, IndexPair(2.0, 4.0)) == pytest.approx(expected, rel=1e-10)


def test_hybrid_y_norm_closed_form():
    tracker = constant_tracker({M_LOW: 1.0, M_HIGH: 4.0})
    assert hybrid_Y_norm(tracker, IndexPair(2.0, 4.0)) == pytest.approx(
        1.0 * 3 + 4.0 * 2, rel=1e-10
    )


def test_hybrid_norm_requires_matching_exponent():
    tracker = constant_tracker({LOW_PAIR: 1.0, A_HIGH: 1.0, U_HIGH: 1.0})
    with pytest.raises(ValueError, match="functional needs"):
        hybrid_X_norm(tracker, IndexPair(3.0, 5.0))  # tracked at q=2, p=4


def test_x0_norm_single_high_mode():
    grid = GridSpec(3, 16, TWO_PI)
    part = DyadicPartition(grid, k0=0)  # low-pass keeps the mean only
    a0 = transform(carrier_field(grid, (3, 0, 0)))
    zero_vec = transform(RealField(grid, np.zeros((3,) + grid.shape)))
    pair = IndexPair(2.0, 4.0)
    got = x0_norm(a0, zero_vec, zero_vec, pair, part, k0=0)
    assert got == pytest.approx(2.0 ** (3.0 / 4.0) * COS3_L4, rel=1e-11)


def test_x0_norm_guards(rng):
    grid2 = GridSpec(2, 16, TWO_PI)
    a = transform(random_band_limited(grid2, rng))
    u = transform(random_band_limited(grid2, rng, ncomp=2))
    with pytest.raises(ValueError, match="three dimensions"):
        x0_norm(a, u, u, IndexPair(2.0, 4.0))
