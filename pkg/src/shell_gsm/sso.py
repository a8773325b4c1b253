"""
Spherical scattering operators of a shell

The four diagonal operators relate the wave amplitudes on both sides of the
shell for every mode:

    f^f = t a^f + Psi f^b      (exterior outgoing)
    a^b = Phi a^f + rho f^b    (bubble regular)

Entries depend only on (tau, l). They are built from the logarithmic
derivatives and boundary-value ratios of the forward (rb -> ra) and backward
(ra -> rb) radial solutions.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import config
from .errors import DegenerateModeError, DomainError
from .media import VACUUM, HomogeneousRegion, ShellGeometry, Side, require_valid, sample
from .radial import (
    DEFAULT_OPTIONS,
    FAMILY_NAMES,
    Direction,
    RadialBoundaryData,
    SolverOptions,
    propagate_stack,
)
from .specfun import TE, TM, mode_arrays, mode_count, riccati_psi, riccati_xi, truncation_degree

logger = logging.getLogger(__name__)

OPERATORS = ("t", "phi", "rho", "psi")

RadialTable = Dict[Tuple[int, int], RadialBoundaryData]


@dataclass(frozen=True, eq=False)
class SSOSet:
    """
    t, Phi, rho, Psi at one frequency.

    `table` holds the per-degree values, shape (4, 2, lmax) indexed
    [operator, tau - 1, l - 1]; t, phi, rho, psi are the same values spread
    over the canonical mode ordering (length N = 2 lmax (lmax + 2)).
    """
    frequency: float
    lmax: int
    table: np.ndarray
    t: np.ndarray
    phi: np.ndarray
    rho: np.ndarray
    psi: np.ndarray
    bubble: HomogeneousRegion = VACUUM
    exterior: HomogeneousRegion = VACUUM

    @classmethod
    def from_table(
        cls,
        frequency: float,
        table: np.ndarray,
        bubble: HomogeneousRegion = VACUUM,
        exterior: HomogeneousRegion = VACUUM,
    ) -> "SSOSet":
        table = np.array(table, dtype=complex)
        if table.ndim != 3 or table.shape[:2] != (4, 2):
            raise DomainError(f"SSO table must have shape (4, 2, lmax), got {table.shape}")
        lmax = table.shape[2]
        tau, _, _, l = mode_arrays(lmax)
        spread = table[:, tau - 1, l - 1]
        table.setflags(write=False)
        for row in spread:
            row.setflags(write=False)
        return cls(
            frequency, lmax, table, spread[0], spread[1], spread[2], spread[3], bubble, exterior
        )

    @classmethod
    def vacuum(
        cls, lmax: int, frequency: float, region: HomogeneousRegion = VACUUM
    ) -> "SSOSet":
        """t = rho = 0, Phi = Psi = 1 (shell of the surrounding medium)"""
        table = np.zeros((4, 2, lmax), dtype=complex)
        table[1] = 1.0
        table[3] = 1.0
        return cls.from_table(frequency, table, region, region)

    @property
    def num_modes(self) -> int:
        return mode_count(self.lmax)

    def entry(self, tau: int, l: int, which: str) -> complex:
        """Value of one operator for (tau, l)"""
        if which not in OPERATORS:
            raise DomainError(f"unknown operator '{which}', expected one of {OPERATORS}")
        if tau not in (TE, TM) or not 1 <= l <= self.lmax:
            raise DomainError(f"no SSO entry for tau={tau}, l={l} (lmax={self.lmax})")
        return complex(self.table[OPERATORS.index(which), tau - 1, l - 1])

    def per_degree(self) -> List[Dict[str, complex]]:
        """Rows (tau, l, t, phi, rho, psi) in (tau, l) order"""
        rows = []
        for tau in (TE, TM):
            for l in range(1, self.lmax + 1):
                row = {"tau": tau, "l": l}
                for k, name in enumerate(OPERATORS):
                    row[name] = complex(self.table[k, tau - 1, l - 1])
                rows.append(row)
        return rows


def default_lmax(geometry: ShellGeometry, frequency: float) -> int:
    """Truncation degree from the exterior wavenumber and the outer radius"""
    kf = abs(geometry.exterior.wavenumber(frequency))
    return truncation_degree(kf, geometry.ra)


def radial_sweep(
    geometry: ShellGeometry,
    frequency: float,
    lmax: int,
    direction: Direction,
    options: SolverOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> RadialTable:
    """Boundary data for every (family, l), l = 1..lmax"""
    keys = [(family, l) for family in (TE, TM) for l in range(1, lmax + 1)]

    def solve(key: Tuple[int, int]) -> RadialBoundaryData:
        return propagate_stack(geometry, key[0], key[1], direction, frequency, options)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve, keys))
    else:
        results = [solve(key) for key in keys]
    return dict(zip(keys, results))


def _vanishing(total: complex, *terms: complex) -> bool:
    scale = max(abs(term) for term in terms)
    return abs(total) <= config.VANISHING_RATIO * scale


def _region_param(region, family: int) -> complex:
    return region.mu if family == TE else region.eps


def _transverse_at(geometry: ShellGeometry, r: float, side: Side, family: int) -> complex:
    s = sample(geometry, r, side)
    return s.mu_perp if family == TE else s.eps_perp


def _impedance_ratio(geometry: ShellGeometry) -> complex:
    """sqrt(Z_f / Z_b)"""
    return complex(np.sqrt(geometry.exterior.relative_impedance / geometry.bubble.relative_impedance))


def _need(table: Optional[RadialTable], geometry, frequency, lmax, direction, options) -> RadialTable:
    if table is not None:
        return table
    return radial_sweep(geometry, frequency, lmax, direction, options)


# ---------------------------------------------------------------------------
# Entry formulas
# ---------------------------------------------------------------------------

def transition_entries(
    geometry: ShellGeometry,
    frequency: float,
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    forward: Optional[RadialTable] = None,
) -> np.ndarray:
    """
    t for every (tau, l), shape (2, lmax).

    With G = g'/g at ra from forward propagation and c = mu_f / (kf mu_perp(ra))
    (eps for TM), t = -(c G psi - psi') / (c G xi - xi') at kf ra.

    Raises:
        DegenerateModeError: vanishing denominator (near-resonant shell)
    """
    lmax = lmax or default_lmax(geometry, frequency)
    forward = _need(forward, geometry, frequency, lmax, Direction.FORWARD, options)
    kf = geometry.exterior.wavenumber(frequency)
    x = kf * geometry.ra
    out = np.zeros((2, lmax), dtype=complex)
    for family in (TE, TM):
        c = _region_param(geometry.exterior, family) / (
            kf * _transverse_at(geometry, geometry.ra, Side.INNER, family)
        )
        for l in range(1, lmax + 1):
            G = forward[(family, l)].far_log_derivative
            psi, xi = riccati_psi(l, x), riccati_xi(l, x)
            denominator = c * G * xi.value - xi.derivative
            if _vanishing(denominator, c * G * xi.value, xi.derivative):
                raise DegenerateModeError(
                    "transition denominator vanishes (near-resonant shell)",
                    family=FAMILY_NAMES[family], l=l,
                )
            out[family - 1, l - 1] = -(c * G * psi.value - psi.derivative) / denominator
    return out


def inward_entries(
    geometry: ShellGeometry,
    frequency: float,
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    forward: Optional[RadialTable] = None,
    t: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Phi for every (tau, l), shape (2, lmax).

    TE: Phi = sqrt(Zf/Zb) (psi_f + t xi_f) / (g(ra) psi_b)
    TM: Phi = [h'(rb) eps_perp(ra)] / [h'(ra) eps_perp(rb)] sqrt(Zf/Zb) (psi_f' + t xi_f') / psi_b'
    with subscripts f, b marking arguments kf ra and kb rb.
    """
    lmax = lmax or default_lmax(geometry, frequency)
    forward = _need(forward, geometry, frequency, lmax, Direction.FORWARD, options)
    if t is None:
        t = transition_entries(geometry, frequency, lmax, options, forward)
    kf = geometry.exterior.wavenumber(frequency)
    kb = geometry.bubble.wavenumber(frequency)
    x, y = kf * geometry.ra, kb * geometry.rb
    z_ratio = _impedance_ratio(geometry)
    eps_ratio = _transverse_at(geometry, geometry.ra, Side.INNER, TM) / _transverse_at(
        geometry, geometry.rb, Side.OUTER, TM
    )
    out = np.zeros((2, lmax), dtype=complex)
    for l in range(1, lmax + 1):
        psi_f, xi_f, psi_b = riccati_psi(l, x), riccati_xi(l, x), riccati_psi(l, y)

        data = forward[(TE, l)]
        if psi_b.value == 0:
            raise DegenerateModeError("regular bubble wave vanishes at rb", family="TE", l=l)
        t1 = t[0, l - 1]
        out[0, l - 1] = (
            data.inverse_far_scale / data.far.value
            * z_ratio * (psi_f.value + t1 * xi_f.value) / psi_b.value
        )

        data = forward[(TM, l)]
        if psi_b.derivative == 0 or data.far.derivative == 0:
            raise DegenerateModeError("TM inward transmission denominator vanishes", family="TM", l=l)
        t2 = t[1, l - 1]
        deriv_ratio = data.start.derivative * data.inverse_far_scale / data.far.derivative
        out[1, l - 1] = (
            deriv_ratio * eps_ratio
            * z_ratio * (psi_f.derivative + t2 * xi_f.derivative) / psi_b.derivative
        )
    return out


def reflection_entries(
    geometry: ShellGeometry,
    frequency: float,
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    backward: Optional[RadialTable] = None,
) -> np.ndarray:
    """
    rho for every (tau, l), shape (2, lmax).

    Mirror of t: with G = g'/g at rb from backward propagation and
    c = mu_b / (kb mu_perp(rb)), rho = -(c G xi - xi') / (c G psi - psi') at kb rb.
    """
    lmax = lmax or default_lmax(geometry, frequency)
    backward = _need(backward, geometry, frequency, lmax, Direction.BACKWARD, options)
    kb = geometry.bubble.wavenumber(frequency)
    y = kb * geometry.rb
    out = np.zeros((2, lmax), dtype=complex)
    for family in (TE, TM):
        c = _region_param(geometry.bubble, family) / (
            kb * _transverse_at(geometry, geometry.rb, Side.OUTER, family)
        )
        for l in range(1, lmax + 1):
            G = backward[(family, l)].far_log_derivative
            psi, xi = riccati_psi(l, y), riccati_xi(l, y)
            denominator = c * G * psi.value - psi.derivative
            if _vanishing(denominator, c * G * psi.value, psi.derivative):
                raise DegenerateModeError(
                    "reflection denominator vanishes (near-resonant bubble)",
                    family=FAMILY_NAMES[family], l=l,
                )
            out[family - 1, l - 1] = -(c * G * xi.value - xi.derivative) / denominator
    return out


def outward_entries(
    geometry: ShellGeometry,
    frequency: float,
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    backward: Optional[RadialTable] = None,
    rho: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Psi for every (tau, l), shape (2, lmax).

    TE: Psi = [g(ra) / g(rb)] sqrt(Zb/Zf) (rho psi_b + xi_b) / xi_f
    TM: Psi = [h'(ra) eps_perp(rb)] / [h'(rb) eps_perp(ra)] sqrt(Zb/Zf) (rho psi_b' + xi_b') / xi_f'
    """
    lmax = lmax or default_lmax(geometry, frequency)
    backward = _need(backward, geometry, frequency, lmax, Direction.BACKWARD, options)
    if rho is None:
        rho = reflection_entries(geometry, frequency, lmax, options, backward)
    kf = geometry.exterior.wavenumber(frequency)
    kb = geometry.bubble.wavenumber(frequency)
    x, y = kf * geometry.ra, kb * geometry.rb
    z_ratio = 1.0 / _impedance_ratio(geometry)
    eps_ratio = _transverse_at(geometry, geometry.rb, Side.OUTER, TM) / _transverse_at(
        geometry, geometry.ra, Side.INNER, TM
    )
    out = np.zeros((2, lmax), dtype=complex)
    for l in range(1, lmax + 1):
        xi_f, psi_b, xi_b = riccati_xi(l, x), riccati_psi(l, y), riccati_xi(l, y)

        data = backward[(TE, l)]
        r1 = rho[0, l - 1]
        out[0, l - 1] = (
            data.inverse_far_scale / data.far.value
            * z_ratio * (r1 * psi_b.value + xi_b.value) / xi_f.value
        )

        data = backward[(TM, l)]
        if data.far.derivative == 0:
            raise DegenerateModeError("TM outward transmission denominator vanishes", family="TM", l=l)
        r2 = rho[1, l - 1]
        deriv_ratio = data.start.derivative * data.inverse_far_scale / data.far.derivative
        out[1, l - 1] = (
            deriv_ratio * eps_ratio
            * z_ratio * (r2 * psi_b.derivative + xi_b.derivative) / xi_f.derivative
        )
    return out


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def assemble(
    geometry: ShellGeometry,
    frequency: float,
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> SSOSet:
    """
    All four operators at one frequency, spread over the canonical ordering.

    Args:
        geometry: Shell to characterize
        frequency: Frequency in Hz
        lmax: Truncation degree; defaults to the rule on kf ra
        options: Integrator settings for continuous segments
        threads: Worker threads over (family, l)
    """
    require_valid(geometry)
    if not frequency > 0:
        raise DomainError(f"frequency must be positive, got {frequency}")
    lmax = lmax or default_lmax(geometry, frequency)
    forward = radial_sweep(geometry, frequency, lmax, Direction.FORWARD, options, threads)
    backward = radial_sweep(geometry, frequency, lmax, Direction.BACKWARD, options, threads)

    t = transition_entries(geometry, frequency, lmax, options, forward)
    phi = inward_entries(geometry, frequency, lmax, options, forward, t)
    rho = reflection_entries(geometry, frequency, lmax, options, backward)
    psi = outward_entries(geometry, frequency, lmax, options, backward, rho)

    logger.info(
        "SSO at %.6g GHz: lmax=%d, %d segments, max|t|=%.3g, max|rho|=%.3g",
        frequency / 1e9, lmax, len(geometry.segments), np.abs(t).max(), np.abs(rho).max(),
    )
    return SSOSet.from_table(
        frequency, np.stack([t, phi, rho, psi]), geometry.bubble, geometry.exterior
    )


def assemble_sweep(
    geometry: ShellGeometry,
    frequencies: Iterable[float],
    lmax: Optional[int] = None,
    options: SolverOptions = DEFAULT_OPTIONS,
    threads: int = 1,
) -> List[SSOSet]:
    """SSO sets over a frequency list, frequency points in parallel"""
    frequencies = list(frequencies)

    def one(frequency: float) -> SSOSet:
        return assemble(geometry, frequency, lmax, options)

    if threads > 1 and len(frequencies) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, frequencies))
    return [one(f) for f in frequencies]


# ---------------------------------------------------------------------------
# Per-mode maps
# ---------------------------------------------------------------------------

def mode_scattering_matrix(sso: SSOSet, tau: int, l: int) -> np.ndarray:
    """2x2 map [f^f, a^b] = [[t, Psi], [Phi, rho]] [a^f, f^b] for one (tau, l)"""
    return np.array(
        [
            [sso.entry(tau, l, "t"), sso.entry(tau, l, "psi")],
            [sso.entry(tau, l, "phi"), sso.entry(tau, l, "rho")],
        ]
    )


def inout_scattering_map(sso: SSOSet, tau: int, l: int) -> np.ndarray:
    """
    Per-mode map from incoming to outgoing wave amplitudes.

    A regular wave splits into incoming and outgoing halves, u1 = (u3 + u4)/2.
    Waves arriving at the shell are x = [a^f/2, a^b/2 + f^b]; waves leaving it
    are y = [a^f/2 + f^f, a^b/2]. Returns the 2x2 matrix with y = S x, unitary
    for a lossless shell with lossless end regions.
    """
    t, psi = sso.entry(tau, l, "t"), sso.entry(tau, l, "psi")
    phi, rho = sso.entry(tau, l, "phi"), sso.entry(tau, l, "rho")
    x = np.array([[0.5, 0.0], [phi / 2, 1 + rho / 2]])
    y = np.array([[0.5 + t, psi], [phi / 2, rho / 2]])
    return np.linalg.solve(x.T, y.T).T


def max_singular_values(sso: SSOSet) -> np.ndarray:
    """Largest singular value of the in/out map for every (tau, l), shape (2, lmax)"""
    out = np.zeros((2, sso.lmax))
    for tau in (TE, TM):
        for l in range(1, sso.lmax + 1):
            out[tau - 1, l - 1] = np.linalg.svd(inout_scattering_map(sso, tau, l), compute_uv=False)[0]
    return out


def frequency_grid(start_hz: float, stop_hz: float, points: int) -> Sequence[float]:
    """Uniform frequency grid including both ends"""
    if points < 1:
        raise DomainError(f"frequency grid needs at least one point, got {points}")
    if points == 1:
        return [float(start_hz)]
    return [float(f) for f in np.linspace(start_hz, stop_hz, points)]

