"""Periodic grids, real/spectral fields, and Fourier multiplier plumbing.

Everything downstream (dyadic blocks, Besov norms, the linearized
propagator, the nonlinear stepper) speaks in terms of the two field
containers defined here.  Conventions, fixed once:

* the box is ``[0, L)^d`` sampled on a uniform ``n^d`` lattice;
* forward transforms are unnormalized sums (``norm="backward"``), so the
  zero coefficient equals ``n^d`` times the grid mean;
* fields carry a leading component axis (scalars have one component);
* ``L^p`` norms of multi-component fields are taken of the pointwise
  Euclidean magnitude, with cell-volume quadrature weight ``(L/n)^d``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as _sfft

_WORKERS = os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[0, L)^d`` with ``n`` points per axis."""

    d: int
    n: int
    L: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.n < 4 or self.n % 2:
            raise ValueError(f"n must be even and >= 4, got {self.n}")
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"box size must be positive and finite, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def cell_volume(self) -> float:
        return (self.L / self.n) ** self.d

    @property
    def volume(self) -> float:
        return self.L**self.d

    @cached_property
    def x_axis(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        out = []
        for j in range(self.d):
            sh = [1] * self.d
            sh[j] = self.n
            out.append(self.x_axis.reshape(sh))
        return out

    @cached_property
    def _int_freq(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    def xi(self, axis: int) -> np.ndarray:
        """Frequency array for one axis, broadcastable over the grid."""
        sh = [1] * self.d
        sh[axis] = self.n
        return (2.0 * np.pi / self.L) * self._int_freq.reshape(sh)

    @cached_property
    def xi_vectors(self) -> list[np.ndarray]:
        return [self.xi(j) for j in range(self.d)]

    @cached_property
    def rho2(self) -> np.ndarray:
        """|xi|^2 on the full grid."""
        out = np.zeros(self.shape)
        for j in range(self.d):
            out = out + self.xi(j) ** 2
        return out

    @cached_property
    def rho(self) -> np.ndarray:
        return np.sqrt(self.rho2)

    @property
    def rho_max(self) -> float:
        return float(np.sqrt(self.d)) * np.pi * self.n / self.L

    @property
    def xi_min(self) -> float:
        """Smallest nonzero frequency magnitude."""
        return 2.0 * np.pi / self.L


def _with_components(arr: np.ndarray, grid: GridSpec) -> np.ndarray:
    if arr.shape == grid.shape:
        return arr[None]
    if arr.ndim == grid.d + 1 and arr.shape[1:] == grid.shape:
        return arr
    raise ValueError(
        f"array of shape {arr.shape} does not fit grid shape {grid.shape} "
        "with an optional leading component axis"
    )


@dataclass(frozen=True)
class RealField:
    """Physical-space samples with shape ``(ncomp, n, ..., n)``."""

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", _with_components(np.asarray(self.samples, float), self.grid))
        if not np.isfinite(self.samples).all():
            raise ValueError("field samples contain NaN or Inf")

    @property
    def ncomp(self) -> int:
        return self.samples.shape[0]

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=self.grid.spatial_axes)

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude across components."""
        if self.ncomp == 1:
            return np.abs(self.samples[0])
        return np.sqrt(np.sum(self.samples**2, axis=0))


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients, full complex layout, shape ``(ncomp, n, ..., n)``."""

    grid: GridSpec
    coef: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "coef", _with_components(np.asarray(self.coef, complex), self.grid))
        if not np.isfinite(self.coef).all():
            raise ValueError("spectral coefficients contain NaN or Inf")

    @property
    def ncomp(self) -> int:
        return self.coef.shape[0]

    def mean(self) -> np.ndarray:
        zero = (slice(None),) + (0,) * self.grid.d
        return self.coef[zero].real / self.grid.n**self.grid.d

    def hermitian_defect(self) -> float:
        """Max |f̂(ξ) − conj f̂(−ξ)|; zero for transforms of real fields."""
        flipped = self.coef
        for ax in self.grid.spatial_axes:
            flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
        return float(np.max(np.abs(self.coef - np.conj(flipped))))


def transform(f: RealField) -> SpectralField:
    coef = _sfft.fftn(f.samples, axes=f.grid.spatial_axes, workers=_WORKERS)
    return SpectralField(f.grid, coef)


def inverse(fh: SpectralField) -> RealField:
    samples = _sfft.ifftn(fh.coef, axes=fh.grid.spatial_axes, workers=_WORKERS).real
    return RealField(fh.grid, samples)


def apply_multiplier(fh: SpectralField, m: np.ndarray) -> SpectralField:
    """Pointwise Fourier multiplier; ``m`` broadcasts over the coefficient array.

    The multiplier array must be finite everywhere (define the zero-mode
    value explicitly when building it; see `scalar_multiplier`).
    """
    m = np.asarray(m)
    if not np.isfinite(m).all():
        raise ValueError("multiplier contains NaN or Inf; set its zero-mode value explicitly")
    return SpectralField(fh.grid, fh.coef * m)


def scalar_multiplier(grid: GridSpec, fn, at_zero: float | complex | None = None) -> np.ndarray:
    """Build a radial multiplier array from ``fn(|xi|)``.

    ``at_zero`` overrides the value at the zero mode, for symbols that are
    singular or undefined there.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(fn(grid.rho))
    if at_zero is not None:
        vals = vals.copy()
        vals[(0,) * grid.d] = at_zero
    if not np.isfinite(vals).all():
        raise ValueError("multiplier is singular away from the zero mode")
    return vals


def lp_norm(f: RealField, p: float) -> float:
    """Cell-weighted L^p norm of the pointwise magnitude (p may be inf)."""
    mag = f.magnitude()
    if np.isinf(p):
        return float(np.max(mag))
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return float((np.sum(mag**p) * f.grid.cell_volume) ** (1.0 / p))


def l2_norm_spectral(fh: SpectralField) -> float:
    """L^2 norm straight from coefficients (Parseval; no inverse transform)."""
    g = fh.grid
    return float(np.sqrt(np.sum(np.abs(fh.coef) ** 2) * g.volume) / g.n**g.d)


def gradient(fh: SpectralField) -> SpectralField:
    """Spectral gradient of a scalar field: returns a d-component field."""
    if fh.ncomp != 1:
        raise ValueError("gradient expects a scalar field")
    g = fh.grid
    comps = [1j * g.xi(j) * fh.coef[0] for j in range(g.d)]
    return SpectralField(g, np.stack(comps))


def divergence(fh: SpectralField) -> SpectralField:
    """Spectral divergence of a d-component field: returns a scalar field."""
    g = fh.grid
    if fh.ncomp != g.d:
        raise ValueError(f"divergence expects {g.d} components, got {fh.ncomp}")
    out = np.zeros(g.shape, complex)
    for j in range(g.d):
        out += 1j * g.xi(j) * fh.coef[j]
    return SpectralField(g, out[None])


def leray_project(fh: SpectralField, part: str = "solenoidal") -> SpectralField:
    """Split a vector field via the Helmholtz/Leray projector.

    ``part="solenoidal"`` applies P = I − ξξᵀ/|ξ|², ``part="potential"``
    applies Q = ξξᵀ/|ξ|².  The zero mode goes with P (so P + Q = I holds
    on every mode).
    """
    g = fh.grid
    if fh.ncomp != g.d:
        raise ValueError(f"projector expects {g.d} components, got {fh.ncomp}")
    inv_rho2 = np.zeros(g.shape)
    nz = g.rho2 > 0
    inv_rho2[nz] = 1.0 / g.rho2[nz]
    dot = np.zeros(g.shape, complex)
    for j in range(g.d):
        dot += g.xi(j) * fh.coef[j]
    q = np.stack([g.xi(j) * dot * inv_rho2 for j in range(g.d)])
    if part == "potential":
        return SpectralField(g, q)
    if part == "solenoidal":
        return SpectralField(g, fh.coef - q)
    raise ValueError(f"unknown part {part!r}; use 'solenoidal' or 'potential'")


def random_band_limited(
    grid: GridSpec,
    rng: np.random.Generator,
    ncomp: int = 1,
    rho_max_frac: float = 0.5,
    amplitude: float = 1.0,
    zero_mean: bool = True,
) -> RealField:
    """Random smooth real field with spectrum confined to |ξ| ≤ frac·Nyquist.

    Coefficients are complex Gaussian under a smooth decay envelope; the
    result is normalized so the sup-norm of the magnitude equals
    ``amplitude``.
    """
    nyq = np.pi * grid.n / grid.L
    cutoff = rho_max_frac * nyq
    shape = (ncomp,) + grid.shape
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    envelope = np.exp(-((grid.rho / max(cutoff, grid.xi_min)) ** 2) * 4.0)
    envelope = np.where(grid.rho <= cutoff, envelope, 0.0)
    coef *= envelope
    if zero_mean:
        coef[(slice(None),) + (0,) * grid.d] = 0.0
    samples = _sfft.ifftn(coef, axes=grid.spatial_axes, workers=_WORKERS).real
    peak = np.max(np.abs(samples))
    if peak > 0:
        samples *= amplitude / peak
    return RealField(grid, samples)
