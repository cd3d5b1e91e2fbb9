"""The linearized acoustic/viscous propagator and its mode functions.

Per Fourier mode the density/potential-velocity pair evolves by
``M(ρ) = [[0, −iρ], [−iγρ, −νρ²]]`` (ν = 2μ+λ the full viscosity, γ the
pressure slope), with eigenvalues

    λ± = (−νρ² ± √(ν²ρ⁴ − 4γρ²)) / 2,

a complex-conjugate pair below the crossover ρ = 2√γ/ν and two real
branches above it; the two branches meet at the crossover.  The
propagator `e^{tM}` and the related φ-functions are evaluated through
divided differences of scalar functions at (tλ₊, tλ₋), organized so every
regime (oscillatory, degenerate, stiff) is computed without cancellation.
The solenoidal velocity part rides along a plain heat factor e^{−μρ²t}.

For any analytic f,  f(tM) = c₀ I + c₁ (tM − z_m I)  with
z_m = t(λ₊+λ₋)/2, c₀ the mean of f at tλ±, and c₁ the divided difference
f[tλ₊, tλ₋].  The resulting coefficient fields (diagonal, coupling,
potential) are real for every ρ, which the appliers exploit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .grid import GridSpec, SpectralField


@dataclass(frozen=True)
class LameParams:
    """Viscosity pair (μ, λ) and pressure slope γ at the reference density."""

    mu: float = 1.0
    lam: float = -1.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError(f"shear viscosity must be positive, got mu={self.mu}")
        if self.nu <= 0:
            raise ValueError(f"need 2*mu + lambda > 0, got nu={self.nu}")
        if self.gamma <= 0:
            raise ValueError(f"pressure slope must be positive, got gamma={self.gamma}")

    @property
    def nu(self) -> float:
        return 2.0 * self.mu + self.lam


class EigenPair(NamedTuple):
    lam_plus: np.ndarray
    lam_minus: np.ndarray


def eigenvalues(rho: np.ndarray | float, params: LameParams = LameParams()) -> EigenPair:
    """λ± of the per-mode generator; complex-conjugate below the crossover.

    The square root of a negative discriminant takes the +i branch, so
    ``lam_plus`` has nonnegative imaginary part there; above the crossover
    ``lam_plus`` is the slow (less negative) real branch.
    """
    rho = np.asarray(rho, float)
    rho2 = rho * rho
    disc = (params.nu * rho2) ** 2 - 4.0 * params.gamma * rho2
    root = np.sqrt(disc.astype(complex))
    lam_plus = 0.5 * (-params.nu * rho2 + root)
    lam_minus = 0.5 * (-params.nu * rho2 - root)
    return EigenPair(lam_plus, lam_minus)


def probe_symbol(rho: np.ndarray | float, branch: str = "plus") -> np.ndarray:
    """Decay-probe symbol h±(ρ) = ρ² ∓ iρ√(4 − ρ²) (unit ν and γ).

    Continued past ρ = 2 by the same analytic branch: h± = ρ² ∓ ρ√(ρ²−4)
    there (the minus choice is then the slow real rate).  Satisfies
    Re h = ρ² exactly below the crossover and h±(0) = 0.
    """
    rho = np.asarray(rho, float)
    root = np.sqrt((rho * rho * (rho * rho - 4.0)).astype(complex))
    sign = {"plus": 1.0, "minus": -1.0}[branch]
    return rho * rho - sign * root


def probe_symbol_residual(rho: np.ndarray | float, branch: str = "plus") -> np.ndarray:
    """h̃± = h± ± 2iρ: the probe symbol with its leading wave phase removed.

    Im h̃ = O(ρ³) near zero, so e^{−t h̃(D)} transports negligibly and
    behaves like a pure parabolic factor on a dyadic band.
    """
    rho = np.asarray(rho, float)
    sign = {"plus": 1.0, "minus": -1.0}[branch]
    return probe_symbol(rho, branch) + sign * 2.0j * rho


# ---------------------------------------------------------------------------
# scalar φ-functions and divided differences


def phi1(z: np.ndarray) -> np.ndarray:
    """(e^z − 1)/z, with the removable singularity filled by series."""
    z = np.asarray(z, complex)
    small = np.abs(z) < 0.15
    zs = np.where(small, 0.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = (np.exp(zs) - 1.0) / np.where(small, 1.0, zs)
    series = np.zeros_like(z)
    term = np.ones_like(z)
    for m in range(1, 12):
        series += term
        term = term * z / (m + 1)
    return np.where(small, series, direct)


def phi2(z: np.ndarray) -> np.ndarray:
    """(e^z − 1 − z)/z², series-filled near the origin."""
    z = np.asarray(z, complex)
    small = np.abs(z) < 0.15
    zs = np.where(small, 1.0, z)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = (np.exp(zs) - 1.0 - zs) / (zs * zs)
    series = np.zeros_like(z)
    term = np.full_like(z, 0.5)
    for m in range(1, 12):
        series += term
        term = term * z / (m + 2)
    return np.where(small, series, direct)


_PHI = {"exp": np.exp, "phi1": phi1, "phi2": phi2}


def _sinhc(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    out = np.sinh(zs) / zs
    z2 = z * z
    return np.where(small, 1.0 + z2 / 6.0 + z2 * z2 / 120.0, out)


def _phi_dd_taylor(fn: str, zm: np.ndarray, dl: np.ndarray) -> np.ndarray:
    """Divided difference of phi1/phi2 by double series, valid for small args.

    From φⱼ[a,b] = ∫₀¹ wⱼ(θ) e^{θ z_m} sinhc(θ δ) dθ with w₁ = θ,
    w₂ = (1−θ)θ; expand both factors and integrate monomials exactly.
    """
    out = np.zeros_like(zm, dtype=complex)
    dl2 = dl * dl
    fact_m = 1.0
    for m in range(0, 11):
        if m:
            fact_m *= m
        fact_j = 1.0  # (2j+1)!
        dpow = np.ones_like(dl2)
        for j in range(0, (10 - m) // 2 + 1):
            if j:
                fact_j *= (2 * j) * (2 * j + 1)
            n = m + 2 * j
            if fn == "phi1":
                moment = 1.0 / (n + 2)
            else:
                moment = 1.0 / (n + 2) - 1.0 / (n + 3)
            out += (zm**m) * dpow * (moment / (fact_m * fact_j))
            dpow = dpow * dl2
    return out


def divided_difference(fn: str, za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    """f[za, zb] = (f(za) − f(zb))/(za − zb), stable in every regime.

    ``fn`` is one of "exp", "phi1", "phi2".  Arguments may be complex
    arrays with nonpositive real part (the stable half-plane); the
    confluent limit za → zb is handled analytically.
    """
    za = np.asarray(za, complex)
    zb = np.asarray(zb, complex)
    zm = 0.5 * (za + zb)
    dl = 0.5 * (za - zb)
    if fn == "exp":
        tiny = np.abs(dl) < 1e-4 * np.maximum(1.0, np.abs(zm))
        dls = np.where(tiny, 1.0, dl)
        direct = 0.5 * (np.exp(za) - np.exp(zb)) / dls
        dl2 = dl * dl
        conf = np.exp(zm) * (1.0 + dl2 / 6.0 + dl2 * dl2 / 120.0)
        return np.where(tiny, conf, direct)

    f = _PHI[fn]
    scale = np.abs(zm) + np.abs(dl)
    prod = za * zb
    small = scale < 0.25
    degenerate = (~small) & (np.abs(prod) < 1e-3 * scale**2)

    # main branch: the exact recursion  φⱼ[a,b] = (z_m·φ_{j−1}[a,b] − Sⱼ₋₁ + el)/(ab)
    prod_safe = np.where(np.abs(prod) > 0, prod, 1.0)
    e_dd = divided_difference("exp", za, zb)
    s_exp = 0.5 * (np.exp(za) + np.exp(zb))
    main1 = (zm * e_dd - s_exp + 1.0) / prod_safe
    if fn == "phi1":
        main = main1
    else:
        s1 = 0.5 * (phi1(za) + phi1(zb))
        main = (zm * main1 - s1 + 1.0) / prod_safe

    out = np.where(small, _phi_dd_taylor(fn, zm, dl), main)
    if np.any(degenerate):
        dls = np.where(np.abs(dl) > 0, dl, 1.0)
        quotient = 0.5 * (f(za) - f(zb)) / dls
        out = np.where(degenerate, quotient, out)
    return out


# ---------------------------------------------------------------------------
# the propagator and φ(tM) symbols as coefficient fields


class SymbolCoefficients(NamedTuple):
    """Real coefficient arrays of f(tM) on a frequency lattice.

    a' = diag_a·â + i·coupling·(ξ·û)
    u' = i·γ·coupling·ξ·â + pot·ξ(ξ·û)/ρ² + sol·(û − ξ(ξ·û)/ρ²)
    """

    diag_a: np.ndarray
    coupling: np.ndarray
    pot: np.ndarray
    sol: np.ndarray


def symbol_coefficients(
    rho2: np.ndarray,
    t: float,
    params: LameParams = LameParams(),
    fn: str = "exp",
) -> SymbolCoefficients:
    """Coefficient arrays of f(tM) (potential block) and f(−tμρ²) (solenoidal).

    Valid for f in {"exp", "phi1", "phi2"}.  The three potential-block
    coefficients are the divided-difference forms
    diag_a = c₀ − z_m c₁, coupling = −t c₁, pot = c₀ + z_m c₁; all real.
    """
    rho2 = np.asarray(rho2, float)
    pair = eigenvalues(np.sqrt(rho2), params)
    za = t * pair.lam_plus
    zb = t * pair.lam_minus
    f = _PHI[fn]
    c0 = 0.5 * (f(za) + f(zb))
    c1 = divided_difference(fn, za, zb)
    zm = 0.5 * (za + zb)
    diag_a = (c0 - zm * c1).real
    coupling = (-t) * c1.real
    pot = (c0 + zm * c1).real
    sol = f(np.asarray(-params.mu * t * rho2, complex)).real
    return SymbolCoefficients(diag_a, coupling, pot, sol)


def green_scalars(
    rho: np.ndarray | float, t: float, params: LameParams = LameParams()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D1, D2, D3): the scalar pieces of the propagator on |ξ| = ρ.

    D1 = (λ₊e^{λ₋t} − λ₋e^{λ₊t})/(λ₊−λ₋), D2 = (e^{λ₋t} − e^{λ₊t})/(λ₊−λ₋),
    D3 = (λ₊e^{λ₊t} − λ₋e^{λ₋t})/(λ₊−λ₋); real for every ρ, evaluated in
    the cancellation-free divided-difference form.
    """
    rho = np.asarray(rho, float)
    co = symbol_coefficients(rho * rho, t, params, "exp")
    return co.diag_a, co.coupling, co.pot


@dataclass(frozen=True)
class GreenSymbol:
    """The propagator e^{tM} on a grid's Fourier lattice at a fixed time.

    ``apply`` advances stacked spectral data (density first, then the d
    velocity components) by time t.  ``matrix_at`` materializes the dense
    (1+d)×(1+d) symbol at one frequency vector for inspection.
    """

    grid: GridSpec
    t: float
    params: LameParams = LameParams()

    def _coeffs(self) -> SymbolCoefficients:
        return _green_coeff_cache(self.grid, self.t, self.params)

    def apply(self, stacked: SpectralField) -> SpectralField:
        g = self.grid
        if stacked.ncomp != 1 + g.d:
            raise ValueError(f"need 1+d = {1 + g.d} components, got {stacked.ncomp}")
        co = self._coeffs()
        out = apply_symbol(stacked.coef, g, co, self.params.gamma)
        return SpectralField(g, out)

    def matrix_at(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, float)
        d = xi.size
        rho2 = float(xi @ xi)
        co = symbol_coefficients(np.array(rho2), self.t, self.params, "exp")
        d1, d2, d3, heat = (float(np.asarray(v)) for v in co)
        G = np.zeros((1 + d, 1 + d), complex)
        G[0, 0] = d1
        G[0, 1:] = 1j * d2 * xi
        G[1:, 0] = 1j * self.params.gamma * d2 * xi
        if rho2 > 0:
            proj = np.outer(xi, xi) / rho2
        else:
            proj = np.zeros((d, d))
        G[1:, 1:] = d3 * proj + heat * (np.eye(d) - proj)
        return G


@lru_cache(maxsize=16)
def _green_coeff_cache(grid: GridSpec, t: float, params: LameParams) -> SymbolCoefficients:
    return symbol_coefficients(grid.rho2, t, params, "exp")


def apply_symbol(
    coef: np.ndarray, grid: GridSpec, co: SymbolCoefficients, gamma: float
) -> np.ndarray:
    """Apply coefficient arrays to stacked (1+d)-component coefficients."""
    return apply_coefficients(coef, grid.xi_vectors, _inv_rho2(grid), co, gamma)


def apply_coefficients(
    coef: np.ndarray,
    xi_list: list[np.ndarray] | tuple[np.ndarray, ...],
    inv_rho2: np.ndarray,
    co: SymbolCoefficients,
    gamma: float,
) -> np.ndarray:
    """Lattice-agnostic core of `apply_symbol`.

    ``xi_list`` holds one broadcastable frequency array per axis and
    ``inv_rho2`` the zero-filled inverse of |ξ|², in whatever layout the
    coefficients use (full complex or the real-transform half layout).
    """
    a = coef[0]
    u = coef[1:]
    dot = xi_list[0] * u[0]
    for j in range(1, len(xi_list)):
        dot = dot + xi_list[j] * u[j]
    pot_amp = dot * inv_rho2
    out = np.empty_like(coef)
    out[0] = co.diag_a * a + 1j * co.coupling * dot
    for j, xi_j in enumerate(xi_list):
        out[1 + j] = (
            1j * gamma * co.coupling * xi_j * a
            + co.pot * xi_j * pot_amp
            + co.sol * (u[j] - xi_j * pot_amp)
        )
    return out


@lru_cache(maxsize=8)
def _inv_rho2(grid: GridSpec) -> np.ndarray:
    inv = np.zeros(grid.shape)
    nz = grid.rho2 > 0
    inv[nz] = 1.0 / grid.rho2[nz]
    return inv


def apply_green(
    stacked: SpectralField, t: float, params: LameParams = LameParams()
) -> SpectralField:
    """Advance stacked (a, u) spectral data by the linear flow for time t."""
    return GreenSymbol(stacked.grid, t, params).apply(stacked)


def solve_linear_duhamel(
    state0: SpectralField,
    forcing: Callable[[float], np.ndarray] | None,
    T: float,
    steps: int,
    params: LameParams = LameParams(),
) -> list[tuple[float, SpectralField]]:
    """March the forced linear system with exact propagation + trapezoid Duhamel.

    ``forcing(t)`` returns stacked coefficient arrays shaped like the
    state.  One step reads
    v(t+dt) = G(dt)(v + dt/2·F(t)) + dt/2·F(t+dt), which is second-order
    in dt and exact when the forcing vanishes.
    """
    g = state0.grid
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = T / steps
    sym = GreenSymbol(g, dt, params)
    co = sym._coeffs()
    out = [(0.0, state0)]
    v = state0.coef.copy()
    f_now = forcing(0.0) if forcing else None
    for istep in range(steps):
        t_next = (istep + 1) * dt
        w = v + 0.5 * dt * f_now if f_now is not None else v
        v = apply_symbol(w, g, co, params.gamma)
        if forcing is not None:
            f_now = forcing(t_next)
            v = v + 0.5 * dt * f_now
        out.append((t_next, SpectralField(g, v)))
    return out
