"""Truncated Fourier representation on the periodic box T_{2pi} x T_{Lv}.

Conventions
-----------
Physical grid: ``z_m = 2 pi m / Nz`` and ``v_n = -Lv/2 + n Lv / Nv``.
Wavenumbers: integer ``k`` in numpy FFT order with ``Nz = 2 Kmax``, and
``eta_j = 2 pi j / Lv``.

Coefficients are unitary, i.e. ``f_hat(k, eta_j)`` is the rectangle-rule
approximation of ``(2 pi Lv)^(-1/2) * int f(z, v) exp(-i(kz + eta v)) dz dv``.
With this choice Parseval carries no weight::

    int |f|^2 dz dv == sum |f_hat|^2

The Nyquist bins (``k = -Kmax`` and ``j = -Nv/2``) have no symmetric partner and
always fall outside the dealiasing band.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatchError, NonFiniteError

_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Thread count used by every FFT in the package (results stay bitwise stable)."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def fft2(a: np.ndarray) -> np.ndarray:
    return sfft.fft2(a, workers=_WORKERS)


def ifft2(a: np.ndarray) -> np.ndarray:
    return sfft.ifft2(a, workers=_WORKERS)


@dataclass(frozen=True)
class Grid:
    """Truncated (k, eta) lattice and its collocation grid.

    Attributes:
        Kmax: largest |k|; the z-direction has ``Nz = 2 * Kmax`` points.
        Nv: number of v points, a power of two.
        Lv: period of the v direction.
        dealias_fraction: modes with ``|k| >= fraction * Kmax`` or
            ``|eta| >= fraction * eta_max`` are removed by :func:`dealias`.
    """

    Kmax: int
    Nv: int
    Lv: float = 32 * math.pi
    dealias_fraction: float = 2 / 3

    def __post_init__(self):
        if int(self.Kmax) != self.Kmax or self.Kmax < 1:
            raise ValueError(f"Kmax must be a positive integer, got {self.Kmax}")
        if int(self.Nv) != self.Nv or self.Nv < 2 or (self.Nv & (self.Nv - 1)):
            raise ValueError(f"Nv must be a power of two, got {self.Nv}")
        if not self.Lv > 0:
            raise ValueError(f"Lv must be positive, got {self.Lv}")
        frac = float(Fraction(self.dealias_fraction).limit_denominator(1000))
        if not 0 < frac <= 1:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {self.dealias_fraction}")
        object.__setattr__(self, "Kmax", int(self.Kmax))
        object.__setattr__(self, "Nv", int(self.Nv))
        object.__setattr__(self, "Lv", float(self.Lv))
        object.__setattr__(self, "dealias_fraction", float(self.dealias_fraction))

    @property
    def Nz(self) -> int:
        return 2 * self.Kmax

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nz, self.Nv)

    @property
    def deta(self) -> float:
        return 2 * math.pi / self.Lv

    @property
    def eta_max(self) -> float:
        return self.Nv // 2 * self.deta

    @cached_property
    def k(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Nz) * self.Nz).astype(np.int64)

    @cached_property
    def j(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.Nv) * self.Nv).astype(np.int64)

    @cached_property
    def eta(self) -> np.ndarray:
        return self.j * self.deta

    @cached_property
    def K(self) -> np.ndarray:
        """k broadcast to the full lattice shape (as float)."""
        return np.broadcast_to(self.k.astype(float)[:, None], self.shape)

    @cached_property
    def ETA(self) -> np.ndarray:
        return np.broadcast_to(self.eta[None, :], self.shape)

    @cached_property
    def z(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.Nz) / self.Nz

    @cached_property
    def v(self) -> np.ndarray:
        return -self.Lv / 2 + self.Lv * np.arange(self.Nv) / self.Nv

    @cached_property
    def norm(self) -> float:
        return math.sqrt(2 * math.pi * self.Lv) / (self.Nz * self.Nv)

    @cached_property
    def phase(self) -> np.ndarray:
        # exp(-i eta_j v_0) with v_0 = -Lv/2 is exactly (-1)^j
        return np.where(self.j % 2 == 0, 1.0, -1.0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kcut = self.dealias_fraction * self.Kmax
        jcut = self.dealias_fraction * (self.Nv // 2)
        keep_k = np.abs(self.k) < kcut
        keep_j = np.abs(self.j) < jcut
        return keep_k[:, None] & keep_j[None, :]

    @cached_property
    def bracket(self) -> np.ndarray:
        """Japanese bracket <k, eta> = (1 + k^2 + eta^2)^(1/2)."""
        return np.sqrt(1.0 + self.K ** 2 + self.ETA ** 2)


def _check_grid(*fields) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grid mismatch: {g} vs {f.grid}")
    return g


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Unitary Fourier coefficients on a :class:`Grid` (read-only)."""

    grid: Grid
    coeffs: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def with_coeffs(self, coeffs: np.ndarray, time_tag: float | None = None) -> "SpectralField":
        return SpectralField(self.grid, coeffs, self.time_tag if time_tag is None else time_tag)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_grid(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_grid(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)

    @classmethod
    def zeros(cls, grid: Grid, time_tag: float = 0.0) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, complex), time_tag)


@dataclass(frozen=True, eq=False)
class PhysicalField:
    """Real samples on the collocation grid, indexed ``values[m, n] = f(z_m, v_n)``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.values, dtype=float, copy=True)
        if a.shape != self.grid.shape:
            raise ValueError(f"value shape {a.shape} does not match grid {self.grid.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "PhysicalField":
        Z, V = np.meshgrid(grid.z, grid.v, indexing="ij")
        return cls(grid, fn(Z, V))


# -- transforms -------------------------------------------------------------

def coeffs_from_values(grid: Grid, values: np.ndarray) -> np.ndarray:
    return fft2(values) * (grid.norm * grid.phase[None, :])


def values_from_coeffs(grid: Grid, coeffs: np.ndarray, check_real: bool = True) -> np.ndarray:
    out = ifft2(coeffs / (grid.norm * grid.phase[None, :]))
    if check_real:
        scale = np.max(np.abs(out.real)) if out.size else 0.0
        bad = np.max(np.abs(out.imag)) if out.size else 0.0
        if bad > 1e-9 * scale and bad > 1e-300:
            raise ValueError(
                f"field is not real (max imaginary part {bad:.3g}); conjugate symmetry violated"
            )
    return out.real


def to_spectral(p: PhysicalField, time_tag: float = 0.0) -> SpectralField:
    vals = np.asarray(p.values)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise NonFiniteError(f"non-finite physical value at grid index {tuple(bad)}")
    return SpectralField(p.grid, coeffs_from_values(p.grid, vals), time_tag)


def to_physical(f: SpectralField) -> PhysicalField:
    return PhysicalField(f.grid, values_from_coeffs(f.grid, f.coeffs))


def conjugate_partner(coeffs: np.ndarray) -> np.ndarray:
    """Array whose entry (k, j) is ``coeffs[-k, -j]``."""
    return np.roll(coeffs[::-1, ::-1], 1, axis=(0, 1))


def is_conjugate_symmetric(f: SpectralField, rtol: float = 1e-12) -> bool:
    c = f.coeffs
    scale = max(np.max(np.abs(c)), 1e-300)
    return bool(np.max(np.abs(c - np.conj(conjugate_partner(c)))) <= rtol * scale)


# -- multipliers --------------------------------------------------------------

def shear_symbol(grid: Grid, t: float) -> np.ndarray:
    """k^2 + (eta - k t)^2, the negative of the sheared Laplacian symbol."""
    return grid.K ** 2 + (grid.ETA - grid.K * t) ** 2


def apply_delta_L(f: SpectralField, t: float) -> SpectralField:
    return f.with_coeffs(-shear_symbol(f.grid, t) * f.coeffs)


def apply_nabla_L(f: SpectralField, t: float) -> tuple[SpectralField, SpectralField]:
    g = f.grid
    return (
        f.with_coeffs(1j * g.K * f.coeffs),
        f.with_coeffs(1j * (g.ETA - g.K * t) * f.coeffs),
    )


def dz(f: SpectralField) -> SpectralField:
    return f.with_coeffs(1j * f.grid.K * f.coeffs)


def dv(f: SpectralField) -> SpectralField:
    return f.with_coeffs(1j * f.grid.ETA * f.coeffs)


def dealias(f: SpectralField) -> SpectralField:
    return f.with_coeffs(np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def project_nonzero(f: SpectralField) -> SpectralField:
    """P_neq: remove the z-average (k = 0 row)."""
    c = np.array(f.coeffs)
    c[0, :] = 0.0
    return f.with_coeffs(c)


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def sobolev_norm(f: SpectralField, sigma: float) -> float:
    """(sum <k, eta>^(2 sigma) |f_hat|^2)^(1/2)."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    w = f.grid.bracket ** (2 * sigma)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


# -- Littlewood-Paley ---------------------------------------------------------

def _smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for u <= 0, 1 for u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        b = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return a / (a + b)


def lp_cutoff(xi: np.ndarray) -> np.ndarray:
    """psi: equal to 1 on |xi| <= 1/2 and 0 on |xi| >= 3/4."""
    return _smooth_step((0.75 - np.abs(xi)) / 0.25)


def _lp_xi(grid: Grid, variables: str) -> np.ndarray:
    if variables == "v":
        return np.abs(grid.ETA)
    if variables == "zv":
        return np.abs(grid.K) + np.abs(grid.ETA)
    raise ValueError(f"variables must be 'v' or 'zv', got {variables!r}")


def _is_dyadic(M: float) -> bool:
    if M <= 0:
        return False
    e = math.log2(M)
    return e >= -1 and abs(e - round(e)) < 1e-12


def lp_levels(grid: Grid, variables: str = "v") -> list[float]:
    """Dyadic levels 1/2, 1, 2, ..., M_top with M_top >= max |xi| on the lattice."""
    xi_max = float(np.max(_lp_xi(grid, variables)))
    top = 1.0
    while top < xi_max:
        top *= 2
    levels = [0.5]
    M = 1.0
    while M <= top:
        levels.append(M)
        M *= 2
    return levels


def lp_multiplier(grid: Grid, M: float, variables: str = "v") -> np.ndarray:
    if not _is_dyadic(M):
        raise ValueError(f"M must be dyadic (1/2, 1, 2, 4, ...), got {M}")
    xi = _lp_xi(grid, variables)
    if M == 0.5:
        return lp_cutoff(xi)
    return lp_cutoff(xi / (2 * M)) - lp_cutoff(xi / M)


def lp_project(f: SpectralField, M: float, variables: str = "v") -> SpectralField:
    """f_M: Littlewood-Paley piece at dyadic level M (f_{1/2} is the low part)."""
    return f.with_coeffs(lp_multiplier(f.grid, M, variables) * f.coeffs)


def paraproduct_split(
    f: SpectralField, g: SpectralField
) -> tuple[SpectralField, SpectralField, SpectralField]:
    """Bony decomposition of the dealiased product fg in the (z, v) variables.

    Returns ``(T_f g, T_g f, R(f, g))`` with
    ``T_f g = sum_{N>=8} f_{<N/8} g_N`` and ``R = sum_N sum_{N/8<=N'<=8N} g_{N'} f_N``.
    """
    grid = _check_grid(f, g)
    levels = lp_levels(grid, "zv")
    fp = {N: values_from_coeffs(grid, lp_project(f, N, "zv").coeffs, False) for N in levels}
    gp = {N: values_from_coeffs(grid, lp_project(g, N, "zv").coeffs, False) for N in levels}
    zero = np.zeros(grid.shape)

    def low(pieces, N):
        return sum((pieces[K] for K in levels if K < N), zero)

    tfg = zero.copy()
    tgf = zero.copy()
    rem = zero.copy()
    for N in levels:
        if N >= 8:
            tfg += low(fp, N / 8) * gp[N]
            tgf += fp[N] * low(gp, N / 8)
        near = sum((gp[K] for K in levels if N / 8 <= K <= 8 * N), zero)
        rem += fp[N] * near
    out = []
    for part in (tfg, tgf, rem):
        out.append(dealias(SpectralField(grid, coeffs_from_values(grid, part), f.time_tag)))
    return tuple(out)


def product(f: SpectralField, g: SpectralField, dealiased: bool = True) -> SpectralField:
    """Pseudo-spectral product fg."""
    grid = _check_grid(f, g)
    p = values_from_coeffs(grid, f.coeffs, False) * values_from_coeffs(grid, g.coeffs, False)
    out = SpectralField(grid, coeffs_from_values(grid, p), f.time_tag)
    return dealias(out) if dealiased else out


# -- one-dimensional v profiles ------------------------------------------------

def profile_coeffs(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Unitary 1D coefficients: int |p|^2 dv == sum |p_hat|^2."""
    return sfft.fft(values) * (math.sqrt(grid.Lv) / grid.Nv) * grid.phase


def profile_values(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifft(coeffs / ((math.sqrt(grid.Lv) / grid.Nv) * grid.phase)).real


def profile_sobolev_norm(grid: Grid, values: np.ndarray, sigma: float) -> float:
    c = profile_coeffs(grid, np.asarray(values, dtype=float))
    w = (1.0 + grid.eta ** 2) ** sigma
    return float(np.sqrt(np.sum(w * np.abs(c) ** 2)))


def profile_derivative(grid: Grid, values: np.ndarray, order: int = 1) -> np.ndarray:
    c = profile_coeffs(grid, np.asarray(values, dtype=float)) * (1j * grid.eta) ** order
    if order % 2 == 1:
        c[grid.Nv // 2] = 0.0
    return profile_values(grid, c)


def _interp_weights(grid: Grid, y: np.ndarray) -> np.ndarray:
    """Matrix E[n, j] with sum_j c_j E[n, j] the band-limited interpolant at y_n.

    The Nyquist term is taken as its cosine so real data stays real off-grid.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    E = np.exp(1j * np.outer(y, grid.eta))
    nyq = grid.Nv // 2
    E[:, nyq] = np.cos(grid.eta[nyq] * y)
    return E


def profile_eval(grid: Grid, values: np.ndarray, y: np.ndarray, order: int = 0) -> np.ndarray:
    """Evaluate a periodic v-profile (or its derivative) at arbitrary points."""
    c = profile_coeffs(grid, np.asarray(values, dtype=float))
    c = c * (1j * grid.eta) ** order
    if order % 2 == 1:
        c[grid.Nv // 2] = 0.0
    E = _interp_weights(grid, y)
    return (E @ c).real / math.sqrt(grid.Lv)


def rows_at(f: SpectralField, y: np.ndarray) -> np.ndarray:
    """z-Fourier rows of the band-limited interpolant at arbitrary v points.

    Returns ``A[k, n]`` such that ``f(z_m, y_n) = sum_k A[k, n] exp(i k z_m)``.
    """
    E = _interp_weights(f.grid, y)
    return (f.coeffs @ E.T) / (f.grid.Nz * f.grid.Nv * f.grid.norm)


def field_from_rows(grid: Grid, rows: np.ndarray, time_tag: float = 0.0) -> SpectralField:
    """Inverse of :func:`rows_at` on the collocation grid."""
    vals = sfft.ifft(rows, axis=0).real * grid.Nz
    return SpectralField(grid, coeffs_from_values(grid, vals), time_tag)


def eval_at_eta(f: SpectralField, targets: np.ndarray) -> np.ndarray:
    """Continuous Fourier transform of the compactly supported data at off-lattice eta.

    ``targets`` has shape ``(Nz, M)``: row k lists the frequencies wanted for mode k.
    On lattice frequencies this reproduces ``f.coeffs`` exactly.
    """
    grid = f.grid
    targets = np.asarray(targets, dtype=float)
    rows = sfft.ifft(f.coeffs / (grid.norm * grid.phase[None, :]), axis=1)
    out = np.empty(targets.shape, dtype=complex)
    for i in range(grid.Nz):
        out[i] = np.exp(-1j * np.outer(targets[i], grid.v)) @ rows[i]
    return out * grid.norm
