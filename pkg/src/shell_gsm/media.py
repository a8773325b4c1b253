"""
Radially stratified shell media

A ShellGeometry is the bubble (homogeneous, radius rb), an ordered stack of
LayerSegments tiling [rb, ra], and the homogeneous exterior. Each segment holds
either a constant uniaxial sample or four callables of r (meters).

Profile formulas written for the continuous-profile example take r in meters.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import mu_0, epsilon_0

from .errors import DomainError, GeometryError

Z0 = math.sqrt(mu_0 / epsilon_0)

ProfileFunction = Callable[[float], complex]


def free_space_wavenumber(frequency: float) -> float:
    """k0 = 2 pi f / c in rad/m"""
    return 2 * math.pi * frequency / SPEED_OF_LIGHT


@dataclass(frozen=True)
class MediumSample:
    """Relative constitutive values of a radially uniaxial medium at one radius"""
    eps_perp: complex
    eps_r: complex
    mu_perp: complex
    mu_r: complex

    def __post_init__(self):
        for name in ("eps_perp", "eps_r", "mu_perp", "mu_r"):
            value = complex(getattr(self, name))
            if value == 0 or not np.isfinite(value):
                raise DomainError(f"{name} must be finite and nonzero, got {value}")
            object.__setattr__(self, name, value)

    @property
    def is_lossless(self) -> bool:
        return all(v.imag == 0 for v in (self.eps_perp, self.eps_r, self.mu_perp, self.mu_r))

    @property
    def is_isotropic(self) -> bool:
        return self.eps_perp == self.eps_r and self.mu_perp == self.mu_r

    @property
    def mu_ratio(self) -> complex:
        """mu_perp / mu_r, the TE anisotropy ratio"""
        return self.mu_perp / self.mu_r

    @property
    def eps_ratio(self) -> complex:
        """eps_perp / eps_r, the TM anisotropy ratio"""
        return self.eps_perp / self.eps_r

    @property
    def has_real_anisotropy_ratio(self) -> bool:
        """Both ratios real and positive, so the Riccati orders stay real"""
        return all(
            ratio.imag == 0 and ratio.real > 0 for ratio in (self.mu_ratio, self.eps_ratio)
        )

    def transverse_wavenumber(self, k0: float) -> complex:
        return k0 * np.sqrt(self.eps_perp * self.mu_perp)


@dataclass(frozen=True)
class HomogeneousRegion:
    """Isotropic homogeneous region (bubble or exterior)"""
    eps: complex = 1.0
    mu: complex = 1.0

    def __post_init__(self):
        for name in ("eps", "mu"):
            value = complex(getattr(self, name))
            if value == 0 or not np.isfinite(value):
                raise DomainError(f"region {name} must be finite and nonzero, got {value}")
            object.__setattr__(self, name, value)

    def wavenumber(self, frequency: float) -> complex:
        """k = k0 sqrt(eps mu), principal branch (Re k >= 0)"""
        return free_space_wavenumber(frequency) * complex(np.sqrt(self.eps * self.mu))

    @property
    def relative_impedance(self) -> complex:
        """sqrt(mu / eps), principal branch (Re >= 0)"""
        return complex(np.sqrt(self.mu / self.eps))

    def impedance(self, frequency: float = 0.0) -> complex:
        """Wave impedance Z = Z0 sqrt(mu / eps) in ohm (frequency independent)"""
        return Z0 * self.relative_impedance

    @property
    def is_lossless(self) -> bool:
        return self.eps.imag == 0 and self.mu.imag == 0

    def as_sample(self) -> MediumSample:
        return MediumSample(self.eps, self.eps, self.mu, self.mu)


VACUUM = HomogeneousRegion(1.0, 1.0)


@dataclass(frozen=True)
class ConstantProfile:
    """Homogeneous (possibly uniaxial) layer"""
    sample: MediumSample

    def at(self, r: float) -> MediumSample:
        return self.sample

    def transverse_derivatives(self, r: float, h: float) -> Tuple[complex, complex]:
        """(d mu_perp/dr, d eps_perp/dr); zero for a constant layer"""
        return 0j, 0j


@dataclass(frozen=True)
class RadialProfile:
    """
    Continuously varying layer.

    The four callables return relative constitutive values at radius r (m).
    d_mu_perp/d_eps_perp give analytic radial derivatives; when missing, a
    central difference with the caller's step is used.
    """
    eps_perp: ProfileFunction
    eps_r: ProfileFunction
    mu_perp: ProfileFunction = lambda r: 1.0
    mu_r: ProfileFunction = lambda r: 1.0
    d_eps_perp: Optional[ProfileFunction] = None
    d_mu_perp: Optional[ProfileFunction] = None
    label: str = "radial"

    @property
    def has_analytic_derivatives(self) -> bool:
        return self.d_eps_perp is not None and self.d_mu_perp is not None

    def at(self, r: float) -> MediumSample:
        return MediumSample(self.eps_perp(r), self.eps_r(r), self.mu_perp(r), self.mu_r(r))

    def transverse_derivatives(self, r: float, h: float) -> Tuple[complex, complex]:
        """(d mu_perp/dr, d eps_perp/dr), analytic when available"""
        if self.d_mu_perp is not None:
            d_mu = complex(self.d_mu_perp(r))
        else:
            d_mu = (complex(self.mu_perp(r + h)) - complex(self.mu_perp(r - h))) / (2 * h)
        if self.d_eps_perp is not None:
            d_eps = complex(self.d_eps_perp(r))
        else:
            d_eps = (complex(self.eps_perp(r + h)) - complex(self.eps_perp(r - h))) / (2 * h)
        return d_mu, d_eps


Profile = Union[ConstantProfile, RadialProfile]


def isotropic(eps: complex, mu: complex = 1.0) -> ConstantProfile:
    return ConstantProfile(MediumSample(eps, eps, mu, mu))


def uniaxial(eps_perp: complex, eps_r: complex, mu_perp: complex = 1.0, mu_r: complex = 1.0) -> ConstantProfile:
    return ConstantProfile(MediumSample(eps_perp, eps_r, mu_perp, mu_r))


def _unity(r: float) -> complex:
    return 1.0


def _zero(r: float) -> complex:
    return 0.0


def radial_profile(
    eps_perp: ProfileFunction,
    eps_r: ProfileFunction,
    mu_perp: Optional[ProfileFunction] = None,
    mu_r: Optional[ProfileFunction] = None,
    d_eps_perp: Optional[ProfileFunction] = None,
    d_mu_perp: Optional[ProfileFunction] = None,
    label: str = "radial",
) -> RadialProfile:
    """Graded layer; an omitted permeability is 1 with zero derivative"""
    if mu_perp is None:
        mu_perp, d_mu_perp = _unity, _zero
    return RadialProfile(eps_perp, eps_r, mu_perp, mu_r or _unity, d_eps_perp, d_mu_perp, label)


@dataclass(frozen=True)
class LayerSegment:
    """One radial segment [r_inner, r_outer] of the shell"""
    r_inner: float
    r_outer: float
    profile: Profile

    @property
    def thickness(self) -> float:
        return self.r_outer - self.r_inner

    @property
    def is_constant(self) -> bool:
        return isinstance(self.profile, ConstantProfile)

    def at(self, r: float) -> MediumSample:
        return self.profile.at(r)


@dataclass(frozen=True)
class ShellGeometry:
    """Bubble, layered shell and exterior; immutable once built"""
    rb: float
    ra: float
    bubble: HomogeneousRegion = VACUUM
    exterior: HomogeneousRegion = VACUUM
    segments: Tuple[LayerSegment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @classmethod
    def from_layers(
        cls,
        rb: float,
        layers: Sequence[Tuple[float, Profile]],
        bubble: HomogeneousRegion = VACUUM,
        exterior: HomogeneousRegion = VACUUM,
    ) -> "ShellGeometry":
        """
        Build a geometry from (thickness, profile) pairs stacked outward from rb.

        Args:
            rb: Bubble radius in meters
            layers: Layer thicknesses (m) and profiles, innermost first
        """
        segments: List[LayerSegment] = []
        r = rb
        for thickness, profile in layers:
            outer = r + thickness
            segments.append(LayerSegment(r, outer, profile))
            r = outer
        return cls(rb=rb, ra=r, bubble=bubble, exterior=exterior, segments=tuple(segments))

    @classmethod
    def homogeneous(
        cls,
        rb: float,
        ra: float,
        profile: Profile,
        bubble: HomogeneousRegion = VACUUM,
        exterior: HomogeneousRegion = VACUUM,
    ) -> "ShellGeometry":
        return cls(rb, ra, bubble, exterior, (LayerSegment(rb, ra, profile),))

    @classmethod
    def vacuum(cls, rb: float, ra: float) -> "ShellGeometry":
        return cls.homogeneous(rb, ra, isotropic(1.0))

    @property
    def interfaces(self) -> List[float]:
        return [seg.r_inner for seg in self.segments] + [self.ra]


class Side(Enum):
    """Which limit to take at an interface radius"""
    INNER = "inner"
    OUTER = "outer"


def _tiling_tolerance(geometry: ShellGeometry) -> float:
    return 1e-12 * max(abs(geometry.ra), abs(geometry.rb), 1.0)


def validate(geometry: ShellGeometry) -> Optional[str]:
    """
    Check every geometry invariant.

    Returns:
        None when valid, otherwise the first violation as a diagnostic string
    """
    if not (geometry.rb > 0 and math.isfinite(geometry.rb) and math.isfinite(geometry.ra)):
        return "bubble radius must be positive and finite"
    if not geometry.rb < geometry.ra:
        return "radii not increasing"
    if not geometry.segments:
        return "shell has no segments"

    tol = _tiling_tolerance(geometry)
    if abs(geometry.segments[0].r_inner - geometry.rb) > tol:
        return "segments do not tile: first segment does not start at rb"
    if abs(geometry.segments[-1].r_outer - geometry.ra) > tol:
        return "segments do not tile: last segment does not end at ra"
    for i, seg in enumerate(geometry.segments):
        if not seg.r_inner < seg.r_outer:
            return f"radii not increasing in segment {i}"
        if i > 0 and abs(seg.r_inner - geometry.segments[i - 1].r_outer) > tol:
            return f"segments do not tile between segments {i - 1} and {i}"
        if isinstance(seg.profile, RadialProfile):
            for r in np.linspace(seg.r_inner, seg.r_outer, 5):
                try:
                    seg.at(float(r))
                except (DomainError, ArithmeticError, ValueError) as e:
                    return f"profile of segment {i} invalid at r={r:.9g}: {e}"
    return None


def require_valid(geometry: ShellGeometry) -> None:
    """Raise GeometryError with the first violation, if any"""
    diagnostic = validate(geometry)
    if diagnostic is not None:
        raise GeometryError(diagnostic)


def segment_index(geometry: ShellGeometry, r: float, side: Side = Side.OUTER) -> int:
    """Index of the segment holding r; side resolves interface radii"""
    tol = _tiling_tolerance(geometry)
    if r < geometry.rb - tol or r > geometry.ra + tol:
        raise GeometryError(f"radius {r:.9g} m outside shell [{geometry.rb:.9g}, {geometry.ra:.9g}]")
    segments = geometry.segments
    if side is Side.INNER:
        for i, seg in enumerate(segments):
            if seg.r_inner + tol < r <= seg.r_outer + tol:
                return i
        return 0
    for i, seg in enumerate(segments):
        if seg.r_inner - tol <= r < seg.r_outer - tol:
            return i
    return len(segments) - 1


def sample(geometry: ShellGeometry, r: float, side: Side = Side.OUTER) -> MediumSample:
    """
    Constitutive values at radius r.

    At an interface, side=INNER returns the limit from the segment below r and
    side=OUTER the limit from the segment above.

    Raises:
        GeometryError: if r lies outside [rb, ra]
    """
    if isinstance(side, str):
        side = Side(side)
    return geometry.segments[segment_index(geometry, r, side)].at(r)


def staircase(geometry: ShellGeometry, n_layers: int) -> ShellGeometry:
    """
    Replace each continuous segment by n_layers equal-thickness constant layers.

    Layer values are sampled at the sub-layer midpoints. Constant segments,
    radii and the end regions are left untouched.
    """
    if n_layers < 1:
        raise DomainError(f"staircase needs n_layers >= 1, got {n_layers}")
    segments: List[LayerSegment] = []
    for seg in geometry.segments:
        if seg.is_constant:
            segments.append(seg)
            continue
        edges = np.linspace(seg.r_inner, seg.r_outer, n_layers + 1)
        edges[0], edges[-1] = seg.r_inner, seg.r_outer
        for inner, outer in zip(edges[:-1], edges[1:]):
            mid = 0.5 * (inner + outer)
            segments.append(LayerSegment(float(inner), float(outer), ConstantProfile(seg.at(mid))))
    return replace(geometry, segments=tuple(segments))


def split_segment(geometry: ShellGeometry, index: int, radius: float) -> ShellGeometry:
    """Split segment `index` at an interior radius into two with the same profile"""
    seg = geometry.segments[index]
    if not seg.r_inner < radius < seg.r_outer:
        raise GeometryError(f"split radius {radius:.9g} m not inside segment {index}")
    pieces = (
        LayerSegment(seg.r_inner, radius, seg.profile),
        LayerSegment(radius, seg.r_outer, seg.profile),
    )
    segments = geometry.segments[:index] + pieces + geometry.segments[index + 1:]
    return replace(geometry, segments=segments)


def with_layer_values(geometry: ShellGeometry, index: int, **overrides: complex) -> ShellGeometry:
    """
    Copy of the geometry with selected constitutive values of a constant layer replaced.

    Example:
        with_layer_values(g, 0, eps_perp=5 - 0.7j, eps_r=5 - 0.7j)
    """
    seg = geometry.segments[index]
    if not seg.is_constant:
        raise GeometryError(f"segment {index} is not a constant layer")
    new_sample = replace(seg.profile.sample, **overrides)
    segments = list(geometry.segments)
    segments[index] = LayerSegment(seg.r_inner, seg.r_outer, ConstantProfile(new_sample))
    return replace(geometry, segments=tuple(segments))
