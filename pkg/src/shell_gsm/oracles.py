"""
Independent reference computations used for validation

- Mie series of a homogeneous sphere (spherical Bessel functions straight from
  scipy.special, never the radial solver or the SSO formulas)
- Multiple-bounce (Neumann series) composition
- Staircase versus continuous-profile convergence
- Plane-wave reconstruction from regular-wave coefficients
- The runnable validation suite behind `shellgsm validate`
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from . import config, presets
from .fields import PlaneWaveSpec, gain_pattern, plane_wave_coefficients, sphere_grid
from .gsm import AntennaGSM, EffectiveGSM, compose, mode_index, multiple_scattering_radius
from .media import VACUUM, HomogeneousRegion, ShellGeometry, free_space_wavenumber, split_segment, staircase
from .radial import DEFAULT_OPTIONS, SolverOptions, anisotropic_orders
from .specfun import mode_arrays, mode_count, radial_harmonics_table, truncation_degree, vector_harmonics_table
from .sso import SSOSet, assemble, default_lmax, inout_scattering_map, max_singular_values

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Mie series
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MieCoefficients:
    """
    Scattering coefficients a_l (electric/TM) and b_l (magnetic/TE), l = 1..lmax.

    Sign convention: the exterior field is psi - b xi (TE) and psi - a xi (TM),
    so the matching transition entries are t_TE = -b and t_TM = -a and a
    lossless sphere has |1 - 2a| = |1 - 2b| = 1.
    """
    a: np.ndarray
    b: np.ndarray
    k: complex

    @property
    def lmax(self) -> int:
        return self.a.size

    @property
    def transition(self) -> np.ndarray:
        """(2, lmax) table [t_TE, t_TM] = [-b, -a]"""
        return np.stack([-self.b, -self.a])


def _riccati_bessel(l: np.ndarray, z: complex) -> Tuple[np.ndarray, np.ndarray]:
    j, dj = spherical_jn(l, z), spherical_jn(l, z, derivative=True)
    return z * j, j + z * dj


def _riccati_hankel(l: np.ndarray, z: complex) -> Tuple[np.ndarray, np.ndarray]:
    # e^{+jwt}: outgoing h2 = j - j y
    h = spherical_jn(l, z) - 1j * spherical_yn(l, z)
    dh = spherical_jn(l, z, derivative=True) - 1j * spherical_yn(l, z, derivative=True)
    return z * h, h + z * dh


def mie_solid_sphere(
    eps: complex,
    mu: complex,
    radius: float,
    exterior: HomogeneousRegion,
    k0: float,
    lmax: int,
) -> MieCoefficients:
    """
    Mie coefficients of a homogeneous sphere in a homogeneous exterior.

    With x = kf radius and m = ks / kf:

        a_l = (mu_f m psi(mx) psi'(x) - mu psi(x) psi'(mx)) / (mu_f m psi(mx) xi'(x) - mu xi(x) psi'(mx))
        b_l = (mu psi(mx) psi'(x) - mu_f m psi(x) psi'(mx)) / (mu psi(mx) xi'(x) - mu_f m xi(x) psi'(mx))
    """
    if not radius > 0:
        raise ValueError(f"sphere radius must be positive, got {radius}")
    eps, mu = complex(eps), complex(mu)
    kf = k0 * complex(np.sqrt(exterior.eps * exterior.mu))
    ks = k0 * complex(np.sqrt(eps * mu))
    m = ks / kf
    x = kf * radius
    l = np.arange(1, lmax + 1)
    psi_x, dpsi_x = _riccati_bessel(l, x)
    psi_mx, dpsi_mx = _riccati_bessel(l, m * x)
    xi_x, dxi_x = _riccati_hankel(l, x)
    mu_f = exterior.mu
    a = (mu_f * m * psi_mx * dpsi_x - mu * psi_x * dpsi_mx) / (
        mu_f * m * psi_mx * dxi_x - mu * xi_x * dpsi_mx
    )
    b = (mu * psi_mx * dpsi_x - mu_f * m * psi_x * dpsi_mx) / (
        mu * psi_mx * dxi_x - mu_f * m * xi_x * dpsi_mx
    )
    return MieCoefficients(a, b, kf)


def _pis_and_taus(lmax: int, cos_theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Angular functions pi_n, tau_n for n = 1..lmax, shape (lmax, D)"""
    mu = np.atleast_1d(cos_theta)
    pis = np.zeros((lmax + 1, mu.size))
    taus = np.zeros((lmax + 1, mu.size))
    pis[1] = 1.0
    taus[1] = mu
    for n in range(2, lmax + 1):
        pis[n] = ((2 * n - 1) * mu * pis[n - 1] - n * pis[n - 2]) / (n - 1)
        taus[n] = n * mu * pis[n] - (n + 1) * pis[n - 1]
    return pis[1:], taus[1:]


def mie_bistatic_rcs(coeffs: MieCoefficients, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    Bistatic RCS (m^2) of the sphere for incidence along +z with x polarization.

    sigma = 4 pi / k^2 (|S2|^2 cos^2 phi + |S1|^2 sin^2 phi)
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), theta.shape)
    n = np.arange(1, coeffs.lmax + 1)[:, None]
    pis, taus = _pis_and_taus(coeffs.lmax, np.cos(theta))
    weight = (2 * n + 1) / (n * (n + 1))
    a, b = coeffs.a[:, None], coeffs.b[:, None]
    s1 = np.sum(weight * (a * pis + b * taus), axis=0)
    s2 = np.sum(weight * (a * taus + b * pis), axis=0)
    k = abs(coeffs.k)
    return 4 * math.pi / k ** 2 * (np.abs(s2) ** 2 * np.cos(phi) ** 2 + np.abs(s1) ** 2 * np.sin(phi) ** 2)


# ---------------------------------------------------------------------------
# Multiple-bounce composition
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NeumannResult:
    effective: EffectiveGSM
    terms: int
    converged: bool
    spectral_radius: float


def neumann_compose(
    antenna: AntennaGSM,
    sso: SSOSet,
    tol: float = 1e-13,
    max_terms: int = 2000,
) -> NeumannResult:
    """
    Effective GSM with M^-1 replaced by sum_k [1/2 (S - 1) rho]^k.

    Terms are added until the newest one falls below tol relative to the sum.
    `converged` is False when the spectral radius is 0.9 or more or the term
    budget runs out.
    """
    n = antenna.num_modes
    s_minus = antenna.S - np.eye(n)
    loop = 0.5 * s_minus * sso.rho[None, :]
    radius = multiple_scattering_radius(antenna, sso)

    rhs = np.hstack([antenna.T, s_minus * sso.phi[None, :]])
    total = rhs.copy()
    term = rhs
    terms = 1
    converged = radius < 0.9
    while converged:
        term = loop @ term
        total += term
        terms += 1
        if np.linalg.norm(term) <= tol * np.linalg.norm(total):
            break
        if terms >= max_terms:
            converged = False
    if not np.any(sso.rho):
        converged = True

    m_inv_t = total[:, : antenna.num_ports]
    m_inv_s_phi = total[:, antenna.num_ports:]
    gamma = antenna.gamma + 0.5 * antenna.R @ (sso.rho[:, None] * m_inv_t)
    r = antenna.R * sso.phi[None, :] + 0.5 * antenna.R @ (sso.rho[:, None] * m_inv_s_phi)
    t = sso.psi[:, None] * m_inv_t
    s = np.eye(n) + np.diag(2 * sso.t) + sso.psi[:, None] * m_inv_s_phi
    eff = EffectiveGSM(antenna.frequency, antenna.lmax, gamma, r, t, s, sso.exterior)
    return NeumannResult(eff, terms, converged, radius)


# ---------------------------------------------------------------------------
# Staircase convergence
# ---------------------------------------------------------------------------

AntennaFactory = Callable[[float, int], AntennaGSM]


@dataclass(frozen=True)
class StaircaseError:
    n_layers: int
    gamma_error: float
    s_error: float
    seconds: float


def transparent_factory(frequency: float, lmax: int) -> AntennaGSM:
    return AntennaGSM.transparent(lmax, frequency)


def staircase_convergence(
    geometry: ShellGeometry,
    n_list: Sequence[int],
    frequencies: Sequence[float],
    antenna: AntennaFactory = transparent_factory,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> List[StaircaseError]:
    """
    Maximum entrywise |Gamma~ - Gamma~_ode| and |S~ - S~_ode| over frequency
    for each staircase resolution, the reference integrating the profiles
    directly.
    """
    if all(seg.is_constant for seg in geometry.segments):
        logger.info("Geometry has no continuous segment; staircase is exact")
    reference = {}
    for f in frequencies:
        sso = assemble(geometry, f, options=options)
        reference[f] = compose(antenna(f, sso.lmax), sso)

    rows = []
    for n in n_list:
        start = time.perf_counter()
        stepped = staircase(geometry, n)
        gamma_err = s_err = 0.0
        for f in frequencies:
            ref = reference[f]
            eff = compose(antenna(f, ref.lmax), assemble(stepped, f, ref.lmax, options))
            gamma_err = max(gamma_err, float(np.max(np.abs(eff.gamma - ref.gamma))))
            s_err = max(s_err, float(np.max(np.abs(eff.S - ref.S))))
        rows.append(StaircaseError(n, gamma_err, s_err, time.perf_counter() - start))
        logger.info("staircase n=%d: |dGamma|=%.3g |dS|=%.3g", n, gamma_err, s_err)
    return rows


def staircase_worst_growth(rows: Sequence[StaircaseError]) -> float:
    """Largest s_error(finer) / s_error(coarser) over consecutive rows, 0 for a single row"""
    worst = 0.0
    for coarse, fine in zip(rows, rows[1:]):
        if coarse.s_error == 0.0:
            ratio = 0.0 if fine.s_error == 0.0 else math.inf
        else:
            ratio = fine.s_error / coarse.s_error
        worst = max(worst, ratio)
    return worst


def staircase_is_monotone(rows: Sequence[StaircaseError], jitter: float = config.STAIRCASE_JITTER) -> bool:
    return staircase_worst_growth(rows) <= jitter


# ---------------------------------------------------------------------------
# Plane-wave reconstruction
# ---------------------------------------------------------------------------

def regular_expansion_field(
    a: np.ndarray, points: np.ndarray, region: HomogeneousRegion, frequency: float
) -> np.ndarray:
    """
    Cartesian E = k sqrt(Z) sum_n a_n u1_n at points (P, 3), shape (P, 3).

    u1 (TE) = j_l(kr) A1; u1 (TM) = psi_l'(kr)/(kr) A2 + sqrt(l(l+1)) j_l(kr)/(kr) A3.
    Points must not sit at the origin.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k = region.wavenumber(frequency)
    z = region.impedance()
    lmax = int(round(math.sqrt(a.size / 2 + 1) - 1))
    tau, _, _, l = mode_arrays(lmax)

    r = np.linalg.norm(points, axis=1)
    theta = np.arccos(np.clip(points[:, 2] / r, -1.0, 1.0))
    phi = np.arctan2(points[:, 1], points[:, 0])
    harmonics = vector_harmonics_table(lmax, theta, phi)
    scalar = radial_harmonics_table(lmax, theta, phi)

    kr = k * r
    degrees = np.arange(1, lmax + 1)[:, None]
    j = spherical_jn(degrees, kr[None, :])
    dj = spherical_jn(degrees, kr[None, :], derivative=True)
    r1 = j[l - 1]
    r2 = (j + kr * dj)[l - 1] / kr
    r3 = np.sqrt(l * (l + 1))[:, None] * j[l - 1] / kr

    te = (tau == 1)[:, None]
    radial_part = np.where(te, r1, r2)
    local = harmonics * radial_part[:, None, :]
    local[:, 0, :] = np.where(te, 0.0, r3 * scalar)
    e_local = k * np.sqrt(z) * np.einsum("n,ncd->cd", a, local)

    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    r_hat = np.stack([st * cp, st * sp, ct])
    theta_hat = np.stack([ct * cp, ct * sp, -st])
    phi_hat = np.stack([-sp, cp, np.zeros_like(sp)])
    cart = e_local[0] * r_hat + e_local[1] * theta_hat + e_local[2] * phi_hat
    return cart.T


def plane_wave_reconstruction(
    spec: PlaneWaveSpec,
    lmax: int,
    region: HomogeneousRegion,
    frequency: float,
    points: np.ndarray,
) -> np.ndarray:
    """Per-point |E_expansion - E_plane| / |E0|"""

    a = plane_wave_coefficients(spec, lmax, region, frequency)
    k = region.wavenumber(frequency)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exact = spec.amplitude * np.exp(-1j * k * points @ spec.direction)[:, None] * spec.field_vector[None, :]
    approx = regular_expansion_field(a, points, region, frequency)
    return np.linalg.norm(approx - exact, axis=1) / abs(spec.amplitude)


def random_ball_points(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    """Uniform points in a ball, excluding a tiny core around the origin"""
    direction = rng.standard_normal((count, 3))
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    r = radius * np.cbrt(rng.uniform(1e-3, 1.0, count))
    return direction * r[:, None]


# ---------------------------------------------------------------------------
# Validation suite
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool = field(init=False)
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        self.passed = bool(np.isfinite(self.value) and self.value <= self.threshold)


def _max_rel(a: np.ndarray, b: np.ndarray, floor: float = 1e-300) -> float:
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _timed(name: str, threshold: float, fn: Callable[[], Tuple[float, str]]) -> CheckResult:
    start = time.perf_counter()
    value, detail = fn()
    return CheckResult(name, value, threshold, detail=detail, seconds=time.perf_counter() - start)


def validation_suite(frequency: float = 3.5e9, seed: int = 0, quick: bool = True) -> List[CheckResult]:
    """
    Runnable oracle checks; each reports its worst deviation and threshold.

    quick=False runs the random checks at full size and adds the staircase
    convergence checks on the graded shell.
    """
    stacks = 3 if quick else config.FULL_RANDOM_STACKS
    radii = 2 if quick else config.FULL_SPLIT_RADII
    rng = np.random.default_rng(seed)
    k0 = free_space_wavenumber(frequency)
    results: List[CheckResult] = []

    def vacuum_identity():
        lmax = 8
        antenna = AntennaGSM.random(lmax, frequency, num_ports=5, seed=seed)
        eff = compose(antenna, assemble(ShellGeometry.vacuum(0.15, 0.18), frequency, lmax))
        err = max(
            float(np.max(np.abs(x - y)))
            for x, y in ((eff.gamma, antenna.gamma), (eff.R, antenna.R), (eff.T, antenna.T), (eff.S, antenna.S))
        )
        return err, "P=5, lmax=8"

    def mie_equivalence():
        worst = 0.0
        for eps in (5.0, 5 - 0.5j):
            sso = assemble(presets.solid_sphere(eps), frequency)
            mie = mie_solid_sphere(eps, 1.0, presets.RA, VACUUM, k0, sso.lmax)
            worst = max(worst, _max_rel(sso.table[0], mie.transition))
        return worst, f"lmax={default_lmax(presets.solid_sphere(5.0), frequency)}"

    def anisotropic_order():
        l1, _ = anisotropic_orders(presets.uniaxial_shell().segments[0].profile.sample, 1)
        return abs(l1 - 2.0), "mu_perp/mu_r = 3, l = 1"

    def phi_equals_psi():
        sso = assemble(presets.two_layer_uniaxial_shell(), frequency)
        return float(np.max(np.abs(sso.phi - sso.psi))), "two uniaxial layers"

    def unitarity():
        worst = 0.0
        for _ in range(stacks):
            sso = assemble(presets.random_uniaxial_stack(rng, 3), frequency)
            for tau in (1, 2):
                for l in range(1, sso.lmax + 1):
                    s = np.linalg.svd(inout_scattering_map(sso, tau, l), compute_uv=False)
                    worst = max(worst, float(np.max(np.abs(s - 1))))
        return worst, f"{stacks} random lossless stacks"

    def passivity():
        worst = 0.0
        for _ in range(stacks):
            sso = assemble(presets.random_uniaxial_stack(rng, 3, lossy=True), frequency)
            worst = max(worst, float(np.max(max_singular_values(sso))) - 1.0)
        return max(worst, 0.0), f"{stacks} random lossy stacks"

    def interface_split():
        geometry = presets.lossy_dielectric_shell()
        base = assemble(geometry, frequency)
        worst = 0.0
        for radius in rng.uniform(presets.RB, presets.RA, radii):
            split = assemble(split_segment(geometry, 0, float(radius)), frequency, base.lmax)
            worst = max(worst, float(np.max(np.abs(split.table - base.table)) / np.max(np.abs(base.table))))
        return worst, f"{radii} random split radii"

    def neumann():
        lmax = 6
        sso = assemble(presets.lossy_dielectric_shell(), frequency, lmax)
        antenna = AntennaGSM.random(lmax, frequency, num_ports=2, seed=seed, contrast=0.8)
        direct = compose(antenna, sso)
        series = neumann_compose(antenna, sso)
        err = np.linalg.norm(series.effective.S - direct.S) / np.linalg.norm(direct.S)
        return float(err), f"{series.terms} terms, radius {series.spectral_radius:.3f}"

    def reconstruction():
        kf = 12.0 / presets.RA
        f = kf / free_space_wavenumber(1.0)
        lmax = truncation_degree(kf, presets.RA)
        spec = PlaneWaveSpec(0.7, 1.1, (0.6, 0.8j))
        points = random_ball_points(rng, 100, lmax / 2 / kf)
        errors = plane_wave_reconstruction(spec, lmax, VACUUM, f, points)
        return float(np.max(errors)), f"lmax={lmax}, 100 points"

    def dipole():
        lmax = 1
        t = np.zeros((mode_count(lmax), 1), dtype=complex)
        t[mode_index(2, "e", 0, 1), 0] = 1.0
        eff = EffectiveGSM(frequency, lmax, np.zeros((1, 1)), np.zeros((1, mode_count(lmax))), t, np.eye(mode_count(lmax)))
        theta, phi, _ = sphere_grid(31, 8)
        gain = gain_pattern(eff, np.array([1.0]), (theta, phi))
        pattern = 1.5 * np.sin(theta) ** 2
        return float(np.max(np.abs(gain - pattern))), f"peak {gain.max():.9f}"

    checks = [
        ("vacuum identity", 1e-12, vacuum_identity),
        ("Mie equivalence", 1e-10, mie_equivalence),
        ("anisotropic order", 1e-14, anisotropic_order),
        ("Phi = Psi", 1e-10, phi_equals_psi),
        ("lossless unitarity", 1e-9, unitarity),
        ("lossy passivity", 1e-9, passivity),
        ("interface split", 1e-10, interface_split),
        ("Neumann series", 1e-10, neumann),
        ("plane-wave reconstruction", 1e-6, reconstruction),
        ("dipole directivity", 1e-8, dipole),
    ]
    for name, threshold, fn in checks:
        results.append(_timed(name, threshold, fn))

    if not quick:
        rows: List[StaircaseError] = []

        def staircase_check():
            rows.extend(staircase_convergence(presets.graded_shell(), (5, 10, 20, 40), [frequency]))
            return rows[-1].s_error, ", ".join(f"n={r.n_layers}: {r.s_error:.2e}" for r in rows)

        def staircase_monotone():
            return staircase_worst_growth(rows), f"jitter {config.STAIRCASE_JITTER}"

        def staircase_baseline():
            n20 = next(r.s_error for r in rows if r.n_layers == 20)
            drift = abs(n20 - config.STAIRCASE_N20_BASELINE) / config.STAIRCASE_N20_BASELINE
            return drift, f"n=20: {n20:.3e} vs {config.STAIRCASE_N20_BASELINE:.3e}"

        results.append(_timed("staircase convergence", 1e-3, staircase_check))
        results.append(_timed("staircase monotone", config.STAIRCASE_JITTER, staircase_monotone))
        if frequency == config.STAIRCASE_BASELINE_HZ:
            results.append(_timed("staircase n=20 baseline", config.STAIRCASE_BASELINE_RTOL, staircase_baseline))

    for r in results:
        logger.info("%s: %s (%.3g <= %.3g)", r.name, "pass" if r.passed else "FAIL", r.value, r.threshold)
    return results
