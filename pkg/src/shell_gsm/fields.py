"""
Excitations and observables

Plane-wave coefficients for the incident field, far fields of outgoing
spherical-wave amplitudes, gain, bistatic RCS and port S-parameter tables.

Field expansion in a homogeneous region:
    E = k sqrt(Z) sum_n (a_n u1_n + f_n u4_n)
Far field of the outgoing part (e^{-jkr}/r removed):
    F(r_hat) = sqrt(Z) sum_n f_n j^(l + 2 - tau) A_n(r_hat)
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .gsm import GSMBlocks, respond
from .media import VACUUM, HomogeneousRegion
from .specfun import mode_arrays, mode_count, vector_harmonics_table

Directions = Tuple[np.ndarray, np.ndarray]

CUT_PLANES = ("xoz", "yoz", "xoy")

# j^0 .. j^3
J_POWERS = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True)
class PlaneWaveSpec:
    """
    Incident plane wave.

    theta_inc, phi_inc give the propagation direction (radians); polarization
    is a unit complex vector in the (theta_hat, phi_hat) basis at that
    direction; amplitude E0 in V/m.
    """
    theta_inc: float
    phi_inc: float
    polarization: Tuple[complex, complex] = (1.0, 0.0)
    amplitude: complex = 1.0

    def __post_init__(self):
        pol = tuple(complex(p) for p in self.polarization)
        if len(pol) != 2:
            raise DomainError("polarization must have two components (theta, phi)")
        norm = math.sqrt(abs(pol[0]) ** 2 + abs(pol[1]) ** 2)
        if abs(norm - 1.0) > 1e-9:
            raise DomainError(f"polarization must have unit norm, got {norm:.12g}")
        if not 0 <= self.theta_inc <= math.pi:
            raise DomainError(f"theta_inc must lie in [0, pi], got {self.theta_inc}")
        object.__setattr__(self, "polarization", pol)

    @property
    def direction(self) -> np.ndarray:
        """Unit propagation vector k_hat"""
        st, ct = math.sin(self.theta_inc), math.cos(self.theta_inc)
        return np.array([st * math.cos(self.phi_inc), st * math.sin(self.phi_inc), ct])

    @property
    def field_vector(self) -> np.ndarray:
        """Cartesian complex polarization vector e_hat"""
        theta_hat, phi_hat = spherical_unit_vectors(self.theta_inc, self.phi_inc)
        return self.polarization[0] * theta_hat + self.polarization[1] * phi_hat


@dataclass(frozen=True, eq=False)
class FarFieldSample:
    """Far-field amplitude (V) at one direction, components (theta, phi)"""
    theta: float
    phi: float
    F: np.ndarray

    @property
    def intensity(self) -> float:
        return float(np.sum(np.abs(self.F) ** 2))


@dataclass(frozen=True, eq=False)
class PatternCut:
    """Directions along a principal-plane cut; angle_deg is the cut coordinate"""
    plane: str
    theta: np.ndarray
    phi: np.ndarray
    angle_deg: np.ndarray


@dataclass(frozen=True)
class SParameterRow:
    frequency: float
    port_i: int
    port_j: int
    mag_db: float
    phase_deg: float
    value: complex


def spherical_unit_vectors(theta: float, phi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Cartesian theta_hat and phi_hat"""
    st, ct, sp, cp = math.sin(theta), math.cos(theta), math.sin(phi), math.cos(phi)
    return np.array([ct * cp, ct * sp, -st]), np.array([-sp, cp, 0.0])


def lmax_for_modes(num_modes: int) -> int:
    """Inverse of mode_count"""
    lmax = int(round(math.sqrt(num_modes / 2 + 1) - 1))
    if lmax < 1 or mode_count(lmax) != num_modes:
        raise DomainError(f"{num_modes} is not a valid spherical mode count")
    return lmax


def to_db(value, power: bool = False):
    """20 log10 |x| (amplitude) or 10 log10 x (power)"""
    value = np.abs(value)
    with np.errstate(divide="ignore"):
        return 10 * np.log10(value) if power else 20 * np.log10(value)


# ---------------------------------------------------------------------------
# Direction grids
# ---------------------------------------------------------------------------

def principal_cut(plane: str = "xoz", resolution_deg: float = 1.0) -> PatternCut:
    """
    Full 360 degree cut through a principal plane.

    xoz and yoz cuts run over the polar angle measured from +z through the
    +x (+y) half-plane and back through the opposite one; xoy runs over phi
    at theta = 90 degrees.
    """
    if plane not in CUT_PLANES:
        raise DomainError(f"unknown cut plane '{plane}', expected one of {CUT_PLANES}")
    if not resolution_deg > 0:
        raise DomainError("cut resolution must be positive")
    angle = np.arange(0.0, 360.0, resolution_deg)
    rad = np.radians(angle)
    if plane == "xoy":
        return PatternCut(plane, np.full_like(rad, math.pi / 2), rad, angle)
    base = 0.0 if plane == "xoz" else math.pi / 2
    first = rad <= math.pi
    theta = np.where(first, rad, 2 * math.pi - rad)
    phi = np.where(first, base, base + math.pi)
    return PatternCut(plane, theta, phi, angle)


def sphere_grid(n_theta: int, n_phi: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gauss-Legendre in cos(theta) times uniform phi.

    Returns flattened (theta, phi, weights) with weights summing to 4 pi;
    exact for band-limited patterns of degree < n_theta and |m| < n_phi / 2.
    """
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    weights = np.outer(w, np.full(n_phi, 2 * math.pi / n_phi))
    return tt.ravel(), pp.ravel(), weights.ravel()


# ---------------------------------------------------------------------------
# Plane waves
# ---------------------------------------------------------------------------

def plane_wave_coefficients(
    spec: PlaneWaveSpec, lmax: int, region: HomogeneousRegion, frequency: float
) -> np.ndarray:
    """
    Regular-wave coefficients a_n of a plane wave E0 e_hat exp(-j k k_hat . r).

    a_n = 4 pi E0 / (k sqrt(Z)) j^-(l + 1 - tau) A_n(k_hat) . e_hat
    """
    k = region.wavenumber(frequency)
    z = region.impedance(frequency)
    harmonics = vector_harmonics_table(lmax, spec.theta_inc, spec.phi_inc)[:, 1:, 0]
    projection = harmonics @ np.asarray(spec.polarization, dtype=complex)
    tau, _, _, l = mode_arrays(lmax)
    phase = J_POWERS[(-(l + 1 - tau)) % 4]
    return 4 * math.pi * spec.amplitude / (k * np.sqrt(z)) * phase * projection


# ---------------------------------------------------------------------------
# Far field
# ---------------------------------------------------------------------------

def far_field_components(
    f_f: np.ndarray, theta: np.ndarray, phi: np.ndarray, region: HomogeneousRegion = VACUUM
) -> np.ndarray:
    """(F_theta, F_phi) at every direction, shape (2, D)"""
    f_f = np.asarray(f_f, dtype=complex).reshape(-1)
    lmax = lmax_for_modes(f_f.size)
    tau, _, _, l = mode_arrays(lmax)
    weighted = f_f * J_POWERS[(l + 2 - tau) % 4]
    harmonics = vector_harmonics_table(lmax, theta, phi)
    return np.sqrt(region.impedance()) * np.einsum("n,ncd->cd", weighted, harmonics[:, 1:, :])


def far_field(
    f_f: np.ndarray, directions: Directions, region: HomogeneousRegion = VACUUM
) -> List[FarFieldSample]:
    """Far-field samples for outgoing amplitudes f_f over (theta, phi) arrays"""
    theta = np.atleast_1d(np.asarray(directions[0], dtype=float))
    phi = np.broadcast_to(np.asarray(directions[1], dtype=float), theta.shape)
    comps = far_field_components(f_f, theta, phi, region)
    return [FarFieldSample(float(t), float(p), comps[:, i]) for i, (t, p) in enumerate(zip(theta, phi))]


def radiated_power(f_f: np.ndarray) -> float:
    """Radiated power 1/2 sum |f|^2 (modal power convention)"""
    return 0.5 * float(np.sum(np.abs(np.asarray(f_f)) ** 2))


def _input_power(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=complex).reshape(-1)
    power = 0.5 * float(np.sum(np.abs(v) ** 2))
    if power == 0:
        raise DomainError("port excitation v must be nonzero")
    return power


def _intensity_gain(comps: np.ndarray, region: HomogeneousRegion, p_in: float) -> np.ndarray:
    intensity = np.sum(np.abs(comps) ** 2, axis=0) / (2 * abs(region.impedance()))
    return 4 * math.pi * intensity / p_in


def gain_pattern(
    eff: GSMBlocks,
    v: np.ndarray,
    directions: Directions,
    db: bool = False,
    region: Optional[HomogeneousRegion] = None,
) -> np.ndarray:
    """
    Gain G = 4 pi |F|^2 / (2 Z_f) / P_in with P_in = 1/2 sum |v|^2.

    The outgoing amplitudes are f^f = T~ v. With db=True returns dBi.
    """
    region = region or getattr(eff, "exterior", VACUUM)
    p_in = _input_power(v)
    f_f = respond(eff, v, np.zeros(eff.num_modes)).f_f
    comps = far_field_components(f_f, directions[0], directions[1], region)
    gain = _intensity_gain(comps, region, p_in)
    return to_db(gain, power=True) if db else gain


def radiation_efficiency(eff: GSMBlocks, v: np.ndarray, region: Optional[HomogeneousRegion] = None) -> float:
    """Closed-surface integral of G over 4 pi, by exact Gauss quadrature"""
    region = region or getattr(eff, "exterior", VACUUM)
    lmax = lmax_for_modes(eff.num_modes)
    theta, phi, weights = sphere_grid(lmax + 2, 2 * lmax + 4)
    gain = gain_pattern(eff, v, (theta, phi), region=region)
    return float(np.sum(gain * weights) / (4 * math.pi))


# ---------------------------------------------------------------------------
# Scattering
# ---------------------------------------------------------------------------

def scattered_amplitudes(
    eff: GSMBlocks,
    spec: PlaneWaveSpec,
    frequency: Optional[float] = None,
    region: Optional[HomogeneousRegion] = None,
) -> np.ndarray:
    """f^f = 1/2 (S~ - 1) a^f with the ports unexcited"""
    region = region or getattr(eff, "exterior", VACUUM)
    frequency = eff.frequency if frequency is None else frequency
    lmax = lmax_for_modes(eff.num_modes)
    a_f = plane_wave_coefficients(spec, lmax, region, frequency)
    return respond(eff, np.zeros(eff.num_ports), a_f).f_f


def bistatic_rcs(
    eff: GSMBlocks, spec: PlaneWaveSpec, directions: Directions, region: Optional[HomogeneousRegion] = None
) -> np.ndarray:
    """sigma(r_hat) = 4 pi |F_s(r_hat)|^2 / |E0|^2 in m^2"""
    region = region or getattr(eff, "exterior", VACUUM)
    f_f = scattered_amplitudes(eff, spec, region=region)
    comps = far_field_components(f_f, directions[0], directions[1], region)
    return 4 * math.pi * np.sum(np.abs(comps) ** 2, axis=0) / abs(spec.amplitude) ** 2


def monostatic_rcs(eff: GSMBlocks, spec: PlaneWaveSpec, region: Optional[HomogeneousRegion] = None) -> float:
    """Backscatter RCS, observed along -k_hat"""
    theta = math.pi - spec.theta_inc
    phi = spec.phi_inc + math.pi
    return float(bistatic_rcs(eff, spec, (np.array([theta]), np.array([phi])), region)[0])


# ---------------------------------------------------------------------------
# Port S-parameters
# ---------------------------------------------------------------------------

def port_sparams(effs: Sequence[GSMBlocks]) -> List[SParameterRow]:
    """Every entry of Gamma~ per frequency as dB magnitude and degrees phase"""
    rows: List[SParameterRow] = []
    for eff in effs:
        for i in range(eff.num_ports):
            for j in range(eff.num_ports):
                value = complex(eff.gamma[i, j])
                rows.append(
                    SParameterRow(
                        frequency=eff.frequency,
                        port_i=i + 1,
                        port_j=j + 1,
                        mag_db=float(to_db(value)),
                        phase_deg=math.degrees(math.atan2(value.imag, value.real)),
                        value=value,
                    )
                )
    return rows
