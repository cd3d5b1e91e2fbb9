"""Dyadic (Littlewood–Paley style) frequency decomposition on the grid.

The smooth radial cutoff ``eta`` equals 1 on [0, 1], falls to 0 across the
narrow collar (1, 1.01), and the annular profile is
``psi(r) = eta(r/2) − eta(r)``.  On a finite grid the dyadic ladder is
truncated to the resolvable octaves ``k_min .. k_max`` and the tails are
lumped into the edge blocks, so the block multipliers sum to exactly 1 on
every nonzero mode (the zero mode is carried separately as the mean).

All derived multipliers (blocks, low-pass partial sums, splits) are built
from shared cached evaluations of ``eta`` so that telescoping identities
hold to the last floating-point bit, not merely to truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import GridSpec, SpectralField, apply_multiplier

COLLAR = 1.01  # upper edge of the cutoff collar; blocks live in (2^k, 2.02*2^k]


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C^inf step: 0 for x<=0, 1 for x>=1, strictly increasing between."""
    x = np.asarray(x, float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
    return a / (a + b)


def eta_profile(r: np.ndarray | float) -> np.ndarray:
    """Radial low-pass profile: 1 on [0,1], 0 on [1.01, inf), smooth, monotone."""
    r = np.asarray(r, float)
    return _smooth_step((COLLAR - r) / (COLLAR - 1.0))


def psi_profile(r: np.ndarray | float) -> np.ndarray:
    """Annular profile eta(r/2) − eta(r); supported in (1, 2.02)."""
    r = np.asarray(r, float)
    return eta_profile(r / 2.0) - eta_profile(r)


def _log2_int(v: float) -> float:
    lg = np.log2(v)
    rounded = np.round(lg)
    return float(rounded) if abs(lg - rounded) < 1e-12 else float(lg)


def resolvable_range(grid: GridSpec) -> tuple[int, int]:
    """Dyadic octaves the grid can resolve: k_min = ⌈log2(2π/L)⌉, k_max = ⌊log2(πn/L)⌋."""
    k_min = int(np.ceil(_log2_int(2.0 * np.pi / grid.L)))
    k_max = int(np.floor(_log2_int(np.pi * grid.n / grid.L)))
    if k_min > k_max:
        raise ValueError(
            f"grid (n={grid.n}, L={grid.L}) resolves no dyadic octave: "
            f"k_min={k_min} > k_max={k_max}"
        )
    return k_min, k_max


@lru_cache(maxsize=8)
def _eta_cache(grid: GridSpec) -> dict[int, np.ndarray]:
    """eta(2^{-j}|xi|) for every j needed by the grid's ladder."""
    k_min, k_max = resolvable_range(grid)
    return {j: eta_profile(np.ldexp(grid.rho, -j)) for j in range(k_min + 1, k_max + 1)}


@dataclass(frozen=True)
class DyadicPartition:
    """Edge-lumped dyadic partition of unity on a grid's Fourier lattice.

    ``k0`` is the low/high split threshold used by `split_low_high`;
    it defaults to ``k_max − 3``.
    """

    grid: GridSpec
    k0: int | None = None
    _range: tuple[int, int] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_range", resolvable_range(self.grid))
        k0 = self.k0 if self.k0 is not None else self.k_max - 3
        if not (self.k_min <= k0 <= self.k_max + 1):
            raise ValueError(
                f"k0={k0} outside admissible [{self.k_min}, {self.k_max + 1}]"
            )
        object.__setattr__(self, "k0", int(k0))

    @property
    def k_min(self) -> int:
        return self._range[0]

    @property
    def k_max(self) -> int:
        return self._range[1]

    @property
    def k_list(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1))

    def _eta(self, j: int) -> np.ndarray:
        return _eta_cache(self.grid)[j]

    def block_multiplier(self, k: int) -> np.ndarray:
        """Lumped block multiplier ψ̃_k; the k-sum is exactly 1 off the zero mode."""
        if not self.k_min <= k <= self.k_max:
            raise ValueError(f"block {k} outside resolvable range [{self.k_min}, {self.k_max}]")
        zero = (0,) * self.grid.d
        if k == self.k_max:
            out = 1.0 - self._eta(k) if k > self.k_min else np.ones(self.grid.shape)
            out[zero] = 0.0
            return out
        upper = self._eta(k + 1)
        if k == self.k_min:
            out = upper.copy()
            out[zero] = 0.0
            return out
        return upper - self._eta(k)

    def lowpass_multiplier(self, j: int) -> np.ndarray:
        """Ṡ_j: the mean plus all blocks below j, as an exact partial sum.

        For j ≤ k_min only the mean passes; for j > k_max this is the
        identity; in between it is the cached eta(2^{-j}|xi|) array, whose
        zero-mode value is already exactly 1.
        """
        if j <= self.k_min:
            out = np.zeros(self.grid.shape)
            out[(0,) * self.grid.d] = 1.0
            return out
        if j > self.k_max:
            return np.ones(self.grid.shape)
        return self._eta(j)

    def tilde_multiplier(self, j: int) -> np.ndarray:
        """Sum of ψ̃ over the clamped window {j−1, j, j+1} (remainder pairing)."""
        lo = max(j - 1, self.k_min)
        hi = min(j + 1, self.k_max)
        out = self.block_multiplier(lo).copy()
        for k in range(lo + 1, hi + 1):
            out += self.block_multiplier(k)
        return out

    def block(self, fh: SpectralField, k: int) -> SpectralField:
        return apply_multiplier(fh, self.block_multiplier(k))

    def lowpass(self, fh: SpectralField, j: int) -> SpectralField:
        return apply_multiplier(fh, self.lowpass_multiplier(j))

    def split_low_high(self, fh: SpectralField, k0: int | None = None) -> tuple[SpectralField, SpectralField]:
        """(Ṡ_{k0} f, f − Ṡ_{k0} f); the mean rides with the low part."""
        k0 = self.k0 if k0 is None else k0
        low = self.lowpass_multiplier(k0)
        f_low = fh.coef * low
        return SpectralField(self.grid, f_low), SpectralField(self.grid, fh.coef - f_low)

    def partition_defect(self) -> float:
        """max over modes of |Σ_k ψ̃_k − 1| (zero mode compared against 0)."""
        total = np.zeros(self.grid.shape)
        for k in self.k_list:
            total += self.block_multiplier(k)
        target = np.ones(self.grid.shape)
        target[(0,) * self.grid.d] = 0.0
        return float(np.max(np.abs(total - target)))


def dealias_mask(grid: GridSpec) -> np.ndarray:
    """Boolean 2/3-rule mask: keeps integer frequencies |f| ≤ n/3 on each axis."""
    keep = np.ones(grid.shape, bool)
    cut = grid.n / 3.0
    for j in range(grid.d):
        sh = [1] * grid.d
        sh[j] = grid.n
        f = grid._int_freq.reshape(sh)
        keep &= np.abs(f) <= cut
    return keep


def spectral_dilate(fh: SpectralField, steps: int = 1) -> SpectralField:
    """Exact dyadic dilation: move each mode ξ to 2ξ (``steps`` times).

    Requires the spectrum to live strictly inside half the lattice,
    axis-wise |f| ≤ n/4 − 1, so the image is representable and keeps the
    Hermitian pairing of a real field.  Out-of-band content at rounding
    level (≤ 1e−12 of the peak, e.g. transform round-trip noise) is
    discarded rather than rejected.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    g = fh.grid
    coef = fh.coef
    f_int = g._int_freq.astype(int)
    for _ in range(steps):
        inner = np.abs(f_int) <= g.n // 4 - 1
        outer_mask = np.ones(g.shape, bool)
        for ax in range(g.d):
            sh = [1] * g.d
            sh[ax] = g.n
            outer_mask &= inner.reshape(sh)
        outside = coef[:, ~outer_mask]
        peak = np.max(np.abs(coef)) if coef.size else 0.0
        if outside.size and np.max(np.abs(outside)) > 1e-12 * peak:
            raise ValueError(
                "dilation would push modes past the lattice: spectrum must "
                f"satisfy |f| <= n/4 - 1 = {g.n // 4 - 1} on every axis"
            )
        src = np.nonzero(inner)[0]
        dst = np.array([np.nonzero(f_int == 2 * f_int[i])[0][0] for i in src])
        new = np.zeros_like(coef)
        src_ix = np.ix_(range(coef.shape[0]), *([src] * g.d))
        dst_ix = np.ix_(range(coef.shape[0]), *([dst] * g.d))
        new[dst_ix] = coef[src_ix]
        coef = new
    return SpectralField(g, coef)
