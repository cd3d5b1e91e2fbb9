"""Block-weighted (Besov-type) norms, time-integrated variants, trackers.

A field's dyadic ladder is summarized by per-block Lᵖ norms; the scale
``(s, p, r)`` norm is the ℓʳ sum of ``2^{ks}·‖Δ̇_k f‖_{Lᵖ}`` over the
resolvable octaves.  Multi-component fields are measured through their
pointwise Euclidean magnitude, which is also the convention for pair
norms like ``‖(a,u)‖`` (components stacked first).

Time-integrated norms follow the block-first convention: integrate (or
sup) each block's norm over the sample times, then do the weighted block
sum.  By Minkowski this dominates integrating the instantaneous Besov
norm, and that ordering is what the hybrid functionals below require.

The hybrid functionals X, Y, X₀ and the admissibility test for the
Lebesgue pair (q, p) are specific to three space dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _sfft
from scipy.integrate import cumulative_trapezoid

from .dyadic import DyadicPartition
from .grid import SpectralField, _WORKERS

#: tracker labels the hybrid functionals read
LOW_PAIR = "low_pair"  # (a, u) stacked, low part, measured at exponent q
A_HIGH = "a_high"
U_HIGH = "u_high"
M_LOW = "m_low"  # momentum low part, exponent q
M_HIGH = "m_high"
U_LOW = "u_low"  # velocity alone, low part, exponent q


@dataclass(frozen=True)
class BesovIndex:
    """Scale index (s, p, r): regularity s, Lebesgue p, block-sum exponent r."""

    s: float
    p: float
    r: float = 1.0

    def __post_init__(self) -> None:
        if not (1.0 <= self.p):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if not (1.0 <= self.r):
            raise ValueError(f"r must be in [1, inf], got {self.r}")


@dataclass(frozen=True)
class IndexPair:
    """Low-frequency exponent q and high-frequency exponent p."""

    q: float
    p: float

    def validated(self) -> "IndexPair":
        ok, why = validate_index_pair(self.q, self.p)
        if not ok:
            raise ValueError(f"index pair (q={self.q}, p={self.p}) rejected: {why}")
        return self


def validate_index_pair(q: float, p: float) -> tuple[bool, str | None]:
    """Check the admissible region for (q, p); returns the first violation.

    Constraints, in the order they are reported:
    2 ≤ p,  p < 6,  2 ≤ q,  q ≤ p,  p ≤ 2q,
    3/q − 3/p ≤ 1,  1 < 2/q + 3/p.
    """
    checks = (
        (p >= 2, "2 <= p fails"),
        (p < 6, "p < 6 fails"),
        (q >= 2, "2 <= q fails"),
        (q <= p, "q <= p fails"),
        (p <= 2 * q, "p <= 2q fails"),
        (3.0 / q - 3.0 / p <= 1.0, "3/q - 3/p <= 1 fails"),
        (2.0 / q + 3.0 / p > 1.0, "1 < 2/q + 3/p fails"),
    )
    for ok, why in checks:
        if not ok:
            return False, why
    return True, None


def block_lp_norms(fh: SpectralField, p: float, part: DyadicPartition | None = None) -> np.ndarray:
    """‖Δ̇_k f‖_{Lᵖ} for every resolvable block, in k order.

    p = 2 is evaluated in coefficient space (Parseval); other exponents
    synthesize each block and use cell-weighted quadrature of the
    pointwise magnitude.
    """
    g = fh.grid
    part = part or DyadicPartition(g)
    out = np.empty(len(part.k_list))
    if p == 2:
        scale = g.volume / g.n ** (2 * g.d)
        power = np.sum(np.abs(fh.coef) ** 2, axis=0)
        for i, k in enumerate(part.k_list):
            m = part.block_multiplier(k)
            out[i] = math.sqrt(float(np.sum(m * m * power)) * scale)
        return out
    axes = tuple(range(-g.d, 0))
    for i, k in enumerate(part.k_list):
        blk = _sfft.ifftn(fh.coef * part.block_multiplier(k), axes=axes, workers=_WORKERS).real
        mag = np.abs(blk[0]) if blk.shape[0] == 1 else np.sqrt(np.sum(blk**2, axis=0))
        if np.isinf(p):
            out[i] = float(mag.max())
        else:
            out[i] = float((np.sum(mag**p) * g.cell_volume) ** (1.0 / p))
    return out


def _weighted_block_sum(values: np.ndarray, k_list: list[int], s: float, r: float) -> float:
    weighted = values * np.exp2(np.asarray(k_list, float) * s)
    if np.isinf(r):
        return float(weighted.max()) if weighted.size else 0.0
    return float(np.sum(weighted**r) ** (1.0 / r))


def besov_norm(fh: SpectralField, idx: BesovIndex, part: DyadicPartition | None = None) -> float:
    """Scale-(s,p,r) norm: ℓʳ over blocks of 2^{ks}·‖Δ̇_k f‖_{Lᵖ}."""
    part = part or DyadicPartition(fh.grid)
    vals = block_lp_norms(fh, idx.p, part)
    return _weighted_block_sum(vals, part.k_list, idx.s, idx.r)


def hardy_norm(fh: SpectralField, part: DyadicPartition | None = None) -> float:
    """L¹ norm of the pointwise square function √(Σ_k |Δ̇_k f|²)."""
    g = fh.grid
    part = part or DyadicPartition(g)
    axes = tuple(range(-g.d, 0))
    acc = np.zeros(g.shape)
    for k in part.k_list:
        blk = _sfft.ifftn(fh.coef * part.block_multiplier(k), axes=axes, workers=_WORKERS).real
        acc += np.sum(blk**2, axis=0)
    return float(np.sum(np.sqrt(acc)) * g.cell_volume)


def time_quadrature(times: np.ndarray, values: np.ndarray, rho: float) -> np.ndarray:
    """Per-block time norm over sampled values: sup (rho=inf) or trapezoid Lᵖ.

    ``values`` has shape (T, K); the reduction runs over the first axis.
    """
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    if times.ndim != 1 or values.shape[0] != times.size:
        raise ValueError("times and value rows are misaligned")
    if np.isinf(rho):
        return values.max(axis=0)
    if times.size == 1:
        return np.zeros(values.shape[1])
    return np.trapezoid(values**rho, times, axis=0) ** (1.0 / rho)


def chemin_lerner_norm(
    times: np.ndarray,
    block_values: np.ndarray,
    k_list: list[int],
    s: float,
    rho: float,
    r: float = 1.0,
) -> float:
    """Block-first time-integrated norm: ℓʳ_k of 2^{ks}·‖N_k(·)‖_{Lᵖ_t}."""
    per_block = time_quadrature(times, block_values, rho)
    return _weighted_block_sum(per_block, k_list, s, r)


def chemin_lerner_running(
    times: np.ndarray,
    block_values: np.ndarray,
    k_list: list[int],
    s: float,
    rho: float,
    r: float = 1.0,
) -> np.ndarray:
    """The same norm restricted to [0, tᵢ] for every sampled tᵢ.

    Equals `chemin_lerner_norm` of each prefix; the whole family comes out
    of one cumulative pass.
    """
    times = np.asarray(times, float)
    values = np.asarray(block_values, float)
    if times.ndim != 1 or values.shape[0] != times.size:
        raise ValueError("times and value rows are misaligned")
    if np.isinf(rho):
        prefixes = np.maximum.accumulate(values, axis=0)
    else:
        acc = cumulative_trapezoid(values**rho, times, axis=0, initial=0.0)
        prefixes = acc ** (1.0 / rho)
    return np.array([_weighted_block_sum(row, k_list, s, r) for row in prefixes])


@dataclass
class _Series:
    p: float
    k_list: list[int]
    times: list[float] = field(default_factory=list)
    rows: list[np.ndarray] = field(default_factory=list)


class NormTracker:
    """Accumulates per-block norms of labelled fields along a trajectory.

    Each label carries one Lebesgue exponent fixed at first recording;
    the time-integrated norms are formed afterwards by `chemin_lerner`.
    Scalar diagnostics (mass, minimum density, ...) ride along under
    their own labels.
    """

    def __init__(self) -> None:
        self._series: dict[str, _Series] = {}
        self._scalars: dict[str, list[tuple[float, float]]] = {}

    @property
    def labels(self) -> list[str]:
        return sorted(self._series)

    def record_blocks(self, label: str, t: float, p: float, k_list: list[int], norms: np.ndarray) -> None:
        s = self._series.get(label)
        if s is None:
            s = self._series[label] = _Series(p=p, k_list=list(k_list))
        if s.p != p or s.k_list != list(k_list):
            raise ValueError(f"label {label!r} re-recorded with different exponent or ladder")
        if s.times and t < s.times[-1]:
            raise ValueError(f"label {label!r}: time {t} goes backwards")
        s.times.append(float(t))
        s.rows.append(np.asarray(norms, float).copy())

    def record_field(
        self,
        label: str,
        t: float,
        fh: SpectralField,
        p: float,
        part: DyadicPartition,
    ) -> None:
        self.record_blocks(label, t, p, part.k_list, block_lp_norms(fh, p, part))

    def record_scalar(self, label: str, t: float, value: float) -> None:
        self._scalars.setdefault(label, []).append((float(t), float(value)))

    def scalar_series(self, label: str) -> tuple[np.ndarray, np.ndarray]:
        pairs = self._scalars[label]
        arr = np.asarray(pairs, float)
        return arr[:, 0], arr[:, 1]

    def series(self, label: str) -> tuple[np.ndarray, np.ndarray, list[int], float]:
        if label not in self._series:
            raise KeyError(
                f"tracker holds no series {label!r}; recorded labels: {self.labels}"
            )
        s = self._series[label]
        return np.asarray(s.times), np.stack(s.rows), list(s.k_list), s.p

    def chemin_lerner(self, label: str, s: float, rho: float, r: float = 1.0) -> float:
        times, mat, k_list, _ = self.series(label)
        return chemin_lerner_norm(times, mat, k_list, s, rho, r)

    def instantaneous(self, label: str, s: float, r: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """(times, Besov-norm-at-each-time) for one label."""
        times, mat, k_list, _ = self.series(label)
        vals = np.array([_weighted_block_sum(row, k_list, s, r) for row in mat])
        return times, vals


def _require(tracker: NormTracker, label: str, expect_p: float) -> None:
    _, _, _, p = tracker.series(label)
    if p != expect_p:
        raise ValueError(f"label {label!r} was tracked at L^{p}, functional needs L^{expect_p}")


def hybrid_X_norm(tracker: NormTracker, pair: IndexPair) -> float:
    """X functional: low-pair triple norm plus a-high and u-high pieces."""
    q, p = pair.validated().q, pair.p
    for lbl, ex in ((LOW_PAIR, q), (A_HIGH, p), (U_HIGH, p)):
        _require(tracker, lbl, ex)
    return (
        tracker.chemin_lerner(LOW_PAIR, -1 + 3 / q, np.inf)
        + tracker.chemin_lerner(LOW_PAIR, -1 + 5 / q, 2)
        + tracker.chemin_lerner(LOW_PAIR, 5 / q, 1)
        + tracker.chemin_lerner(A_HIGH, 3 / p, np.inf)
        + tracker.chemin_lerner(A_HIGH, 3 / p, 1)
        + tracker.chemin_lerner(U_HIGH, -1 + 3 / p, np.inf)
        + tracker.chemin_lerner(U_HIGH, 1 + 3 / p, 1)
    )


def hybrid_Y_norm(tracker: NormTracker, pair: IndexPair) -> float:
    """Y functional: the momentum's low triple norm plus its high pair."""
    q, p = pair.validated().q, pair.p
    for lbl, ex in ((M_LOW, q), (M_HIGH, p)):
        _require(tracker, lbl, ex)
    return (
        tracker.chemin_lerner(M_LOW, -1 + 3 / q, np.inf)
        + tracker.chemin_lerner(M_LOW, -1 + 5 / q, 2)
        + tracker.chemin_lerner(M_LOW, 5 / q, 1)
        + tracker.chemin_lerner(M_HIGH, -1 + 3 / p, np.inf)
        + tracker.chemin_lerner(M_HIGH, 3 / p, 1)
    )


def x0_norm(
    a0: SpectralField,
    u0: SpectralField,
    m0: SpectralField,
    pair: IndexPair,
    part: DyadicPartition | None = None,
    k0: int | None = None,
) -> float:
    """Initial-data functional: low (a,m) pair at −3+7/q plus the high X_p pair."""
    q, p = pair.validated().q, pair.p
    g = a0.grid
    if g.d != 3:
        raise ValueError("the hybrid functionals are defined in three dimensions")
    part = part or DyadicPartition(g)
    k0 = part.k0 if k0 is None else k0
    pair_am = SpectralField(g, np.concatenate([a0.coef, m0.coef]))
    low_am, _ = part.split_low_high(pair_am, k0)
    _, a_high = part.split_low_high(a0, k0)
    _, u_high = part.split_low_high(u0, k0)
    return (
        besov_norm(low_am, BesovIndex(-3 + 7 / q, q, 1), part)
        + besov_norm(a_high, BesovIndex(3 / p, p, 1), part)
        + besov_norm(u_high, BesovIndex(-1 + 3 / p, p, 1), part)
    )
