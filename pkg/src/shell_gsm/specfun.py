"""
Special functions and spherical harmonics

Riccati-Bessel/Hankel functions of real (possibly fractional) order and complex
argument, fully normalized associated Legendre functions with pole-safe
companions, and the real-valued scalar and vector spherical harmonics used by
every other module.

Conventions:
    - Time dependence e^{+jwt}; outgoing waves use H^(2), so
      xi_l(x) = sqrt(pi x / 2) H^(2)_{l+1/2}(x) and xi_0(x) = j e^{-jx}.
    - P~_l^m has unit L2 norm on [-1, 1] and carries no Condon-Shortley phase.
    - Y_{sigma m l} = sqrt((2 - delta_m0) / 2pi) P~_l^m(cos theta) {cos, sin}(m phi).
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np
from scipy.special import h2vp, hankel2, jv, jvp, yv, yvp

from .errors import DomainError

ArrayLike = Union[float, complex, np.ndarray]

TE = 1
TM = 2


class Parity(Enum):
    """Azimuthal parity of a real spherical harmonic"""
    EVEN = "e"
    ODD = "o"


@dataclass(frozen=True)
class ModeIndex:
    """
    Spherical mode n = (tau, sigma, m, l).

    Canonical linear order: l = 1..Lmax; within l, m = 0..l; within m, even
    then odd (odd skipped at m = 0); within (sigma, m), TE then TM.
    """
    tau: int
    sigma: Parity
    m: int
    l: int

    def __post_init__(self):
        if self.tau not in (TE, TM):
            raise DomainError(f"tau must be 1 (TE) or 2 (TM), got {self.tau}")
        if not isinstance(self.sigma, Parity):
            object.__setattr__(self, "sigma", Parity(self.sigma))
        if self.l < 1:
            raise DomainError(f"degree l must be >= 1, got {self.l}")
        if not 0 <= self.m <= self.l:
            raise DomainError(f"order m must satisfy 0 <= m <= l, got m={self.m}, l={self.l}")
        if self.m == 0 and self.sigma is Parity.ODD:
            raise DomainError("odd harmonic vanishes identically for m = 0")

    @property
    def linear(self) -> int:
        base = 2 * (self.l * self.l - 1)
        if self.m == 0:
            return base + self.tau - 1
        odd = 1 if self.sigma is Parity.ODD else 0
        return base + 2 + 4 * (self.m - 1) + 2 * odd + self.tau - 1

    @classmethod
    def from_linear(cls, linear: int) -> "ModeIndex":
        if linear < 0:
            raise DomainError(f"linear mode index must be >= 0, got {linear}")
        l = math.isqrt(linear // 2 + 1)
        while 2 * ((l + 1) ** 2 - 1) <= linear:
            l += 1
        offset = linear - 2 * (l * l - 1)
        if offset < 2:
            return cls(tau=offset + 1, sigma=Parity.EVEN, m=0, l=l)
        offset -= 2
        m = offset // 4 + 1
        rem = offset % 4
        sigma = Parity.ODD if rem >= 2 else Parity.EVEN
        return cls(tau=rem % 2 + 1, sigma=sigma, m=m, l=l)


def mode_count(lmax: int) -> int:
    """Number of modes N = 2 Lmax (Lmax + 2)"""
    return 2 * lmax * (lmax + 2)


@lru_cache(maxsize=64)
def canonical_modes(lmax: int) -> Tuple[ModeIndex, ...]:
    """All modes up to lmax in canonical order"""
    modes: List[ModeIndex] = []
    for l in range(1, lmax + 1):
        for m in range(0, l + 1):
            for sigma in (Parity.EVEN, Parity.ODD):
                if m == 0 and sigma is Parity.ODD:
                    continue
                for tau in (TE, TM):
                    modes.append(ModeIndex(tau, sigma, m, l))
    return tuple(modes)


@lru_cache(maxsize=64)
def mode_arrays(lmax: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(tau, odd, m, l) integer arrays over the canonical ordering"""
    modes = canonical_modes(lmax)
    tau = np.array([n.tau for n in modes], dtype=int)
    odd = np.array([n.sigma is Parity.ODD for n in modes], dtype=int)
    m = np.array([n.m for n in modes], dtype=int)
    l = np.array([n.l for n in modes], dtype=int)
    for arr in (tau, odd, m, l):
        arr.setflags(write=False)
    return tau, odd, m, l


# ---------------------------------------------------------------------------
# Riccati-Bessel family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiPair:
    """Riccati function value and its derivative with respect to the argument"""
    value: ArrayLike
    derivative: ArrayLike


def _riccati_args(order: ArrayLike, x: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    order = np.asarray(order, dtype=float)
    x = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(order)):
        raise DomainError("Riccati order must be finite")
    if np.any(order < 0):
        raise DomainError(f"Riccati order must be >= 0, got {order}")
    if np.any(x == 0):
        raise DomainError("Riccati functions are evaluated at x = 0")
    return order, x


def _unwrap(arr: np.ndarray) -> ArrayLike:
    return arr.item() if arr.ndim == 0 else arr


def _riccati(order, x, cyl, cyl_prime) -> RiccatiPair:
    nu, z = _riccati_args(order, x)
    nu = nu + 0.5
    scale = np.sqrt(np.pi * z / 2)
    c = cyl(nu, z)
    dc = cyl_prime(nu, z)
    value = scale * c
    derivative = scale * (dc + c / (2 * z))
    return RiccatiPair(_unwrap(value), _unwrap(derivative))


def riccati_psi(order: ArrayLike, x: ArrayLike) -> RiccatiPair:
    """
    Riccati-Bessel psi_l(x) = sqrt(pi x / 2) J_{l+1/2}(x) and its derivative.

    Args:
        order: Real order l >= 0, fractional allowed; arrays broadcast against x
        x: Complex argument, nonzero

    Returns:
        RiccatiPair(value, derivative)
    """
    return _riccati(order, x, jv, jvp)


def riccati_xi(order: ArrayLike, x: ArrayLike) -> RiccatiPair:
    """
    Riccati-Hankel xi_l(x) = sqrt(pi x / 2) H^(2)_{l+1/2}(x) and its derivative.

    Outgoing under the e^{+jwt} convention: xi_0(x) = j e^{-jx}.
    """
    return _riccati(order, x, hankel2, h2vp)


def riccati_chi(order: ArrayLike, x: ArrayLike) -> RiccatiPair:
    """Riccati-Neumann chi_l(x) = sqrt(pi x / 2) Y_{l+1/2}(x), so xi = psi - j chi"""
    return _riccati(order, x, yv, yvp)


# ---------------------------------------------------------------------------
# Legendre functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LegendreTable:
    """
    P~_l^m(cos theta), m P~_l^m / sin theta and dP~_l^m / dtheta.

    Each array has shape (lmax + 1, lmax + 1, D) indexed [l, m, direction];
    entries with m > l are zero.
    """
    p: np.ndarray
    m_over_sin: np.ndarray
    dtheta: np.ndarray


def legendre_table(lmax: int, theta: ArrayLike) -> LegendreTable:
    """
    Fully normalized associated Legendre functions for all 0 <= m <= l <= lmax.

    For m >= 1 the recurrence runs on P~_l^m / sin theta, seeded with
    sin^(m-1) theta, so m P~ / sin theta is exact at the poles. The theta
    derivative uses the order-raising/lowering identity, again without division.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(theta)
    s = np.sin(theta)
    size = lmax + 2
    shape = (size, size, theta.size)
    p = np.zeros(shape)
    over_sin = np.zeros(shape)

    p[0, 0] = np.sqrt(0.5)
    for m in range(1, lmax + 1):
        if m == 1:
            over_sin[1, 1] = np.sqrt(1.5) * p[0, 0]
        else:
            over_sin[m, m] = np.sqrt((2 * m + 1) / (2 * m)) * s * over_sin[m - 1, m - 1]

    for m in range(0, lmax + 1):
        work = p if m == 0 else over_sin
        if m + 1 <= lmax:
            work[m + 1, m] = np.sqrt(2 * m + 3) * x * work[m, m]
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = np.sqrt((2 * l + 1) * ((l - 1) ** 2 - m * m) / ((2 * l - 3) * (l * l - m * m)))
            work[l, m] = a * x * work[l - 1, m] - b * work[l - 2, m]
        if m >= 1:
            p[m:lmax + 1, m] = s * over_sin[m:lmax + 1, m]

    dtheta = np.zeros(shape)
    m_over_sin = np.zeros(shape)
    for l in range(0, lmax + 1):
        if l >= 1:
            dtheta[l, 0] = -np.sqrt(l * (l + 1)) * p[l, 1]
        for m in range(1, l + 1):
            lower = np.sqrt((l + m) * (l - m + 1)) * p[l, m - 1]
            upper = np.sqrt((l + m + 1) * (l - m)) * p[l, m + 1]
            dtheta[l, m] = 0.5 * (lower - upper)
            m_over_sin[l, m] = m * over_sin[l, m]

    trim = slice(0, lmax + 1)
    return LegendreTable(
        p=p[trim, trim],
        m_over_sin=m_over_sin[trim, trim],
        dtheta=dtheta[trim, trim],
    )


def legendre_normalized(l: int, m: int, u: float) -> float:
    """
    Normalized associated Legendre function P~_l^m(u) with unit L2 norm on [-1, 1].

    Raises:
        DomainError: if |u| > 1 or (l, m) is invalid
    """
    if l < 0 or not 0 <= m <= l:
        raise DomainError(f"invalid Legendre indices l={l}, m={m}")
    if abs(u) > 1:
        raise DomainError(f"Legendre argument must satisfy |u| <= 1, got {u}")
    table = legendre_table(l, np.arccos(u))
    return float(table.p[l, m, 0])


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def _azimuthal_norm(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.where(m == 0, 1.0, 2.0) / (2 * np.pi))


def scalar_harmonic(mode: ModeIndex, theta: float, phi: float) -> complex:
    """Real scalar harmonic Y_{sigma m l}(theta, phi), returned as complex"""
    table = legendre_table(mode.l, theta)
    c = _azimuthal_norm(np.array(mode.m))
    trig = np.sin(mode.m * phi) if mode.sigma is Parity.ODD else np.cos(mode.m * phi)
    return complex(c * table.p[mode.l, mode.m, 0] * trig)


@dataclass(frozen=True)
class VectorHarmonicValue:
    """Vector harmonic components in the local (r, theta, phi) frame"""
    components: np.ndarray


def vector_harmonics_table(lmax: int, theta: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """
    A_{tau n}(theta, phi) for every canonical mode up to lmax.

    Args:
        lmax: Truncation degree
        theta, phi: Direction arrays of equal length D (radians)

    Returns:
        Real array (N, 3, D) of (r, theta, phi) components; TE rows hold A_1,
        TM rows hold A_2. The radial harmonic A_3 is returned by
        radial_harmonics_table.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    table = legendre_table(lmax, theta)
    tau, odd, m, l = mode_arrays(lmax)

    c = _azimuthal_norm(m)[:, None]
    mphi = m[:, None] * phi[None, :]
    cos_m, sin_m = np.cos(mphi), np.sin(mphi)
    is_odd = odd[:, None].astype(bool)
    trig = np.where(is_odd, sin_m, cos_m)
    dtrig = np.where(is_odd, cos_m, -sin_m)

    d_theta = c * table.dtheta[l, m] * trig
    d_phi_over_sin = c * table.m_over_sin[l, m] * dtrig
    norm = 1.0 / np.sqrt(l * (l + 1))[:, None]

    out = np.zeros((l.size, 3, theta.size))
    te = (tau == TE)[:, None]
    out[:, 1] = norm * np.where(te, d_phi_over_sin, d_theta)
    out[:, 2] = norm * np.where(te, -d_theta, d_phi_over_sin)
    return out


def radial_harmonics_table(lmax: int, theta: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """Y_{sigma m l} for every canonical mode, shape (N, D); A_3 = r_hat Y"""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    table = legendre_table(lmax, theta)
    _, odd, m, l = mode_arrays(lmax)
    mphi = m[:, None] * phi[None, :]
    trig = np.where(odd[:, None].astype(bool), np.sin(mphi), np.cos(mphi))
    return _azimuthal_norm(m)[:, None] * table.p[l, m] * trig


def vector_harmonic(kind: int, mode: ModeIndex, theta: float, phi: float) -> VectorHarmonicValue:
    """
    Vector spherical harmonic A_kind for one mode and direction.

    A_1 = grad Y x r / sqrt(l(l+1)), A_2 = r grad Y / sqrt(l(l+1)), A_3 = r_hat Y.
    The mode's own tau is ignored; kind selects the harmonic.
    """
    if kind not in (1, 2, 3):
        raise DomainError(f"vector harmonic kind must be 1, 2 or 3, got {kind}")
    components = np.zeros(3, dtype=complex)
    if kind == 3:
        components[0] = scalar_harmonic(mode, theta, phi)
        return VectorHarmonicValue(components)
    row = ModeIndex(kind, mode.sigma, mode.m, mode.l).linear
    table = vector_harmonics_table(mode.l, theta, phi)
    components[:] = table[row, :, 0]
    return VectorHarmonicValue(components)


def radial_function(kind: int, p: int, l: int, kr: complex) -> complex:
    """
    Radial factor R^(p)_{kind, l}(kr) of the vector spherical wave functions.

    kind 1: z(kr)/kr, kind 2: z'(kr)/kr, kind 3: sqrt(l(l+1)) z(kr)/(kr)^2,
    with z = psi for p = 1 (regular) and z = xi for p = 4 (outgoing).
    """
    if kind not in (1, 2, 3):
        raise DomainError(f"radial function kind must be 1, 2 or 3, got {kind}")
    if p not in (1, 4):
        raise DomainError(f"radial function type p must be 1 or 4, got {p}")
    if kr == 0:
        raise DomainError("radial function evaluated at kr = 0")
    pair = riccati_psi(l, kr) if p == 1 else riccati_xi(l, kr)
    if kind == 1:
        return pair.value / kr
    if kind == 2:
        return pair.derivative / kr
    return math.sqrt(l * (l + 1)) * pair.value / kr ** 2


def truncation_degree(kf: float, ra: float) -> int:
    """
    Truncation degree Lmax = ceil(kf ra + 7 (kf ra)^(1/3) + 3).

    A relative slack of 1e-12 keeps exact integers (kf ra = 8 -> 25) from being
    pushed up by rounding in the product.
    """
    x = kf * ra
    if not x > 0:
        raise DomainError(f"truncation degree needs kf * ra > 0, got {x}")
    value = x + 7.0 * np.cbrt(x) + 3.0
    return int(math.ceil(value * (1 - 1e-12)))
