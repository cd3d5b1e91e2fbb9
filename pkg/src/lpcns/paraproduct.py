"""Frequency-interaction splitting of products (paraproduct + remainder).

The product of two fields splits as

    f·g = T_f g + T_g f + R(f, g) + mean(f)·mean(g),

where ``T_f g = Σ_j Ṡ_{j−1}f · Δ̇_j g`` pairs low modes of ``f`` against
each block of ``g`` and ``R`` collects the diagonal interactions
``Σ_{|i−j|≤1} Δ̇_i f · Δ̇_j g``.  With the conventions of `dyadic` (the
mean rides in Ṡ, blocks are edge-lumped) this identity is exact on the
grid, to rounding, with no dealiasing; for mean-free factors the trailing
term vanishes and the three pieces reconstruct ``f·g`` itself.

Products are formed in physical space.  ``dealias=True`` additionally
truncates the result by the 2/3 rule (useful inside nonlinear solvers,
wrong for identity checks).
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _sfft

from .dyadic import DyadicPartition, dealias_mask
from .grid import GridSpec, RealField, SpectralField, _WORKERS, apply_multiplier, transform


def _block_stack(fh: SpectralField, part: DyadicPartition) -> np.ndarray:
    """Physical-space block fields, shape (nblocks, ncomp, *grid.shape)."""
    mult = np.stack([part.block_multiplier(k) for k in part.k_list])
    coef = fh.coef[None, :] * mult[:, None]
    return _sfft.ifftn(coef, axes=tuple(range(-fh.grid.d, 0)), workers=_WORKERS).real


def _maybe_dealias(grid: GridSpec, samples: np.ndarray, dealias: bool) -> RealField:
    if not dealias:
        return RealField(grid, samples)
    axes = tuple(range(-grid.d, 0))
    coef = _sfft.fftn(samples, axes=axes, workers=_WORKERS)
    coef *= dealias_mask(grid)
    return RealField(grid, _sfft.ifftn(coef, axes=axes, workers=_WORKERS).real)


def _para_assemble(
    grid: GridSpec, blocks_low: np.ndarray, blocks_high: np.ndarray, mean_low: float
) -> np.ndarray:
    total = np.zeros_like(blocks_high[0])
    low_running = np.full(grid.shape, mean_low)
    for t in range(blocks_high.shape[0]):
        # Ṡ_{j−1} f for j = k_min + t keeps blocks strictly below j−1's ceiling,
        # i.e. indices <= t−2 of the stack, plus the mean.
        total += low_running * blocks_high[t]
        if t >= 1:
            low_running = low_running + blocks_low[t - 1]
    return total


def _remainder_assemble(blocks_f: np.ndarray, blocks_g: np.ndarray) -> np.ndarray:
    K = blocks_f.shape[0]
    total = np.zeros_like(blocks_g[0])
    for t in range(K):
        window = blocks_f[max(t - 1, 0) : min(t + 1, K - 1) + 1].sum(axis=0)
        total += window * blocks_g[t]
    return total


def paraproduct(
    fh_low: SpectralField,
    fh_high: SpectralField,
    part: DyadicPartition | None = None,
    dealias: bool = False,
) -> RealField:
    """T_f g with f = ``fh_low`` (scalar) modulating the blocks of g = ``fh_high``."""
    if fh_low.ncomp != 1:
        raise ValueError("the modulating factor of a paraproduct must be scalar")
    if fh_low.grid != fh_high.grid:
        raise ValueError("paraproduct factors live on different grids")
    grid = fh_low.grid
    part = part or DyadicPartition(grid)
    blocks_f = _block_stack(fh_low, part)[:, 0]
    blocks_g = _block_stack(fh_high, part)
    total = _para_assemble(grid, blocks_f, blocks_g, float(fh_low.mean()[0]))
    return _maybe_dealias(grid, total, dealias)


def remainder(
    fh_f: SpectralField,
    fh_g: SpectralField,
    part: DyadicPartition | None = None,
    dealias: bool = False,
) -> RealField:
    """R(f, g) = Σ_{|i−j|≤1} Δ̇_i f · Δ̇_j g (f scalar, g any width)."""
    if fh_f.ncomp != 1:
        raise ValueError("the first remainder factor must be scalar")
    if fh_f.grid != fh_g.grid:
        raise ValueError("remainder factors live on different grids")
    grid = fh_f.grid
    part = part or DyadicPartition(grid)
    blocks_f = _block_stack(fh_f, part)[:, 0]
    blocks_g = _block_stack(fh_g, part)
    total = _remainder_assemble(blocks_f, blocks_g)
    return _maybe_dealias(grid, total, dealias)


def bony_pieces(
    fh_f: SpectralField,
    fh_g: SpectralField,
    part: DyadicPartition | None = None,
    dealias: bool = False,
) -> tuple[RealField, RealField, RealField]:
    """(T_f g, T_g f, R(f,g)) for scalar factors, sharing one block pass."""
    if fh_f.ncomp != 1 or fh_g.ncomp != 1:
        raise ValueError("bony_pieces expects scalar factors")
    if fh_f.grid != fh_g.grid:
        raise ValueError("factors live on different grids")
    grid = fh_f.grid
    part = part or DyadicPartition(grid)
    blocks_f = _block_stack(fh_f, part)
    blocks_g = _block_stack(fh_g, part)
    t_fg = _para_assemble(grid, blocks_f[:, 0], blocks_g, float(fh_f.mean()[0]))
    t_gf = _para_assemble(grid, blocks_g[:, 0], blocks_f, float(fh_g.mean()[0]))
    rem = _remainder_assemble(blocks_f[:, 0], blocks_g[:, 0][:, None])
    return (
        _maybe_dealias(grid, t_fg, dealias),
        _maybe_dealias(grid, t_gf, dealias),
        _maybe_dealias(grid, rem, dealias),
    )


def lowpass_multiplier_commutator(
    fh_a: SpectralField,
    fh_b: SpectralField,
    symbol: np.ndarray,
    part: DyadicPartition | None = None,
    k0: int | None = None,
) -> RealField:
    """[Ṡ_{k0} A(D), T_a] b — the smoothed-multiplier/paraproduct commutator.

    ``symbol`` is the multiplier array of the 0-order operator A(D); its
    zero-mode entry must be 0 (the class of interest annihilates means).
    """
    grid = fh_a.grid
    part = part or DyadicPartition(grid)
    k0 = part.k0 if k0 is None else k0
    sym = np.asarray(symbol)
    if abs(complex(sym[(0,) * grid.d])) != 0.0:
        raise ValueError("commutator symbol must vanish at the zero mode")
    smoothed = part.lowpass_multiplier(k0) * sym
    t_ab = paraproduct(fh_a, fh_b, part)
    first = apply_multiplier(transform(t_ab), smoothed)
    sab = apply_multiplier(fh_b, smoothed)
    second = paraproduct(fh_a, sab, part)
    out = _sfft.ifftn(first.coef, axes=tuple(range(-grid.d, 0)), workers=_WORKERS).real
    return RealField(grid, out - second.samples)
