"""
Radial functions of the stratified shell

For each degree l the TE radial function g(r) and the TM radial function h(r)
obey g'' + p g' + q g = 0 with

    p1 = -mu_perp' / mu_perp,  q1 = k0^2 mu_perp eps_perp - (mu_perp / mu_r) l(l+1) / r^2
    p2 = -eps_perp' / eps_perp, q2 = k0^2 mu_perp eps_perp - (eps_perp / eps_r) l(l+1) / r^2

Across an interface g and g'/mu_perp (TE), h and h'/eps_perp (TM) are
continuous. Constant segments are solved in closed form with Riccati functions
of the transverse wavenumber; continuous profiles are integrated with an
adaptive Runge-Kutta 4(5) stepper.

Only logarithmic derivatives and ratios of boundary values are consumed
downstream, so the propagated pair is renormalized at every segment entry and
the accumulated scale is carried as a complex logarithm.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import RK45

from . import config
from .errors import DegenerateModeError, DomainError, StiffnessError
from .media import (
    ConstantProfile,
    LayerSegment,
    MediumSample,
    ShellGeometry,
    Side,
    free_space_wavenumber,
    require_valid,
    sample,
)
from .specfun import TE, TM, riccati_psi, riccati_xi

logger = logging.getLogger(__name__)

FAMILY_NAMES = {TE: "TE", TM: "TM"}


class Direction(Enum):
    """Propagation direction of a radial solve"""
    FORWARD = "forward"    # rb -> ra
    BACKWARD = "backward"  # ra -> rb


@dataclass(frozen=True)
class SolverOptions:
    """Integrator settings shared by every numeric segment solve"""
    rtol: float = config.DEFAULT_RTOL
    atol: float = config.DEFAULT_ATOL
    max_steps: int = config.DEFAULT_MAX_STEPS
    method: str = config.DEFAULT_ODE_METHOD
    force_numeric: bool = False

    def with_tolerance(self, tol: float) -> "SolverOptions":
        return SolverOptions(tol, self.atol * tol / self.rtol, self.max_steps, self.method, self.force_numeric)


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class RadialCoefficients:
    """p1, q1 (TE) and p2, q2 (TM) as functions of r on one segment"""
    p1: Callable[[float], complex]
    q1: Callable[[float], complex]
    p2: Callable[[float], complex]
    q2: Callable[[float], complex]

    def for_family(self, family: int) -> Tuple[Callable[[float], complex], Callable[[float], complex]]:
        return (self.p1, self.q1) if family == TE else (self.p2, self.q2)


def radial_coefficients(segment: LayerSegment, l: int, k0: float) -> RadialCoefficients:
    """Coefficients of the radial equations for degree l on a segment"""
    ll = l * (l + 1)
    h = config.FD_STEP_FRACTION * segment.thickness
    profile = segment.profile

    def p1(r: float) -> complex:
        d_mu, _ = profile.transverse_derivatives(r, h)
        return -d_mu / profile.at(r).mu_perp

    def p2(r: float) -> complex:
        _, d_eps = profile.transverse_derivatives(r, h)
        return -d_eps / profile.at(r).eps_perp

    def q1(r: float) -> complex:
        s = profile.at(r)
        return k0 ** 2 * s.mu_perp * s.eps_perp - s.mu_ratio * ll / r ** 2

    def q2(r: float) -> complex:
        s = profile.at(r)
        return k0 ** 2 * s.mu_perp * s.eps_perp - s.eps_ratio * ll / r ** 2

    return RadialCoefficients(p1, q1, p2, q2)


@dataclass(frozen=True)
class BoundaryPair:
    """Value and radial derivative of g (or h) at one radius"""
    value: complex
    derivative: complex

    @property
    def log_derivative(self) -> complex:
        return self.derivative / self.value


@dataclass(frozen=True)
class RadialBoundaryData:
    """
    Boundary data of g (TE) or h (TM) for one degree.

    The starting end carries value 1 (rb for forward, ra for backward). The far
    end is stored renormalized; its true value is exp(log_scale) * far.value.
    """
    family: int
    l: int
    direction: Direction
    start: BoundaryPair
    far: BoundaryPair
    log_scale: complex = 0j
    segments_solved: int = field(default=0, compare=False)

    @property
    def far_scale(self) -> complex:
        return cmath.exp(self.log_scale)

    @property
    def inverse_far_scale(self) -> complex:
        return cmath.exp(-self.log_scale)

    def _end(self, at_rb: bool) -> Tuple[complex, complex]:
        starts_at_rb = self.direction is Direction.FORWARD
        if at_rb == starts_at_rb:
            return self.start.value, self.start.derivative
        scale = self.far_scale
        return scale * self.far.value, scale * self.far.derivative

    @property
    def value_rb(self) -> complex:
        return self._end(True)[0]

    @property
    def deriv_rb(self) -> complex:
        return self._end(True)[1]

    @property
    def value_ra(self) -> complex:
        return self._end(False)[0]

    @property
    def deriv_ra(self) -> complex:
        return self._end(False)[1]

    @property
    def far_log_derivative(self) -> complex:
        """g'/g at the far end, independent of the scale"""
        return self.far.log_derivative


def _transverse(s: MediumSample, family: int) -> complex:
    return s.mu_perp if family == TE else s.eps_perp


def _check_family(family: int) -> None:
    if family not in (TE, TM):
        raise DomainError(f"family must be TE (1) or TM (2), got {family}")


# ---------------------------------------------------------------------------
# Initial conditions
# ---------------------------------------------------------------------------

def initial_condition_forward(
    geometry: ShellGeometry, family: int, l: int, frequency: float
) -> BoundaryPair:
    """
    Shell-side (g, g') at rb for a regular bubble wave normalized to g(rb) = 1.

    g'(rb) = (kb mu_perp(rb) / mu_b) psi_l'(kb rb) / psi_l(kb rb); the TM case
    replaces mu by eps.

    Raises:
        DegenerateModeError: psi_l(kb rb) vanishes (resonant bubble)
    """
    _check_family(family)
    kb = geometry.bubble.wavenumber(frequency)
    psi = riccati_psi(l, kb * geometry.rb)
    if abs(psi.value) <= config.VANISHING_RATIO * abs(psi.derivative):
        raise DegenerateModeError(
            "regular bubble wave vanishes at rb", family=FAMILY_NAMES[family], l=l
        )
    shell = sample(geometry, geometry.rb, Side.OUTER)
    region = geometry.bubble.mu if family == TE else geometry.bubble.eps
    ratio = _transverse(shell, family) / region
    return BoundaryPair(1.0 + 0j, complex(kb * ratio * psi.derivative / psi.value))


def initial_condition_backward(
    geometry: ShellGeometry, family: int, l: int, frequency: float
) -> BoundaryPair:
    """
    Shell-side (g, g') at ra for a purely outgoing exterior wave, g(ra) = 1.

    g'(ra) = (kf mu_perp(ra) / mu_f) xi_l'(kf ra) / xi_l(kf ra).
    """
    _check_family(family)
    kf = geometry.exterior.wavenumber(frequency)
    xi = riccati_xi(l, kf * geometry.ra)
    if abs(xi.value) <= config.VANISHING_RATIO * abs(xi.derivative):
        raise DegenerateModeError(
            "outgoing exterior wave vanishes at ra", family=FAMILY_NAMES[family], l=l
        )
    shell = sample(geometry, geometry.ra, Side.INNER)
    region = geometry.exterior.mu if family == TE else geometry.exterior.eps
    ratio = _transverse(shell, family) / region
    return BoundaryPair(1.0 + 0j, complex(kf * ratio * xi.derivative / xi.value))


# ---------------------------------------------------------------------------
# Segment solvers
# ---------------------------------------------------------------------------

def anisotropic_orders(s: MediumSample, l: int) -> Tuple[complex, complex]:
    """
    Riccati orders (L1, L2) of a uniaxial layer.

    L = sqrt(ratio l(l+1) + 1/4) - 1/2 with ratio mu_perp/mu_r for TE and
    eps_perp/eps_r for TM. Real ratios give real orders, returned as floats.
    """
    ll = l * (l + 1)
    orders = []
    for ratio in (s.mu_ratio, s.eps_ratio):
        if ratio.imag == 0 and ratio.real > 0:
            orders.append(math.sqrt(ratio.real * ll + 0.25) - 0.5)
        else:
            orders.append(cmath.sqrt(ratio * ll + 0.25) - 0.5)
    return orders[0], orders[1]


def _segment_ends(segment: LayerSegment, direction: Direction) -> Tuple[float, float]:
    if direction is Direction.FORWARD:
        return segment.r_inner, segment.r_outer
    return segment.r_outer, segment.r_inner


def _closed_form(
    order: float, k: complex, r0: float, r1: float, ic: BoundaryPair, family: int, l: int
) -> BoundaryPair:
    # g = A psi(k r) + B xi(k r); psi xi' - psi' xi = -j, so det = -j k
    psi0, xi0 = riccati_psi(order, k * r0), riccati_xi(order, k * r0)
    v, d = ic.value, ic.derivative
    det = -1j * k
    a = (v * k * xi0.derivative - d * xi0.value) / det
    b = (d * psi0.value - v * k * psi0.derivative) / det
    if not (np.isfinite(a) and np.isfinite(b)):
        raise DegenerateModeError(
            "singular closed-form coefficient solve", family=FAMILY_NAMES[family], l=l
        )
    psi1, xi1 = riccati_psi(order, k * r1), riccati_xi(order, k * r1)
    value = a * psi1.value + b * xi1.value
    derivative = k * (a * psi1.derivative + b * xi1.derivative)
    return BoundaryPair(complex(value), complex(derivative))


def solve_closed_isotropic(
    segment: LayerSegment,
    family: int,
    l: int,
    ic: BoundaryPair,
    frequency: float,
    direction: Direction = Direction.FORWARD,
) -> BoundaryPair:
    """
    Propagate (g, g') across an isotropic constant segment.

    The solution is A psi_l(k r) + B xi_l(k r) with k = k0 sqrt(eps mu), (A, B)
    fixed by the initial condition at the starting end.
    """
    s = segment.at(segment.r_inner)
    if not (isinstance(segment.profile, ConstantProfile) and s.is_isotropic):
        raise DomainError("solve_closed_isotropic needs a constant isotropic segment")
    k = s.transverse_wavenumber(free_space_wavenumber(frequency))
    r0, r1 = _segment_ends(segment, direction)
    return _closed_form(l, k, r0, r1, ic, family, l)


def solve_closed_anisotropic(
    segment: LayerSegment,
    family: int,
    l: int,
    ic: BoundaryPair,
    frequency: float,
    direction: Direction = Direction.FORWARD,
) -> BoundaryPair:
    """
    Propagate (g, g') across a uniaxial constant segment.

    Uses Riccati functions of fractional order L1 (TE) or L2 (TM) and the
    transverse wavenumber k0 sqrt(eps_perp mu_perp). The anisotropy ratio
    must be real and positive.
    """
    if not isinstance(segment.profile, ConstantProfile):
        raise DomainError("solve_closed_anisotropic needs a constant segment")
    s = segment.profile.sample
    if not s.has_real_anisotropy_ratio:
        raise DomainError("closed-form anisotropic solve needs real positive anisotropy ratios")
    order = anisotropic_orders(s, l)[family - 1]
    k = s.transverse_wavenumber(free_space_wavenumber(frequency))
    r0, r1 = _segment_ends(segment, direction)
    return _closed_form(order, k, r0, r1, ic, family, l)


def solve_numeric(
    segment: LayerSegment,
    family: int,
    l: int,
    ic: BoundaryPair,
    frequency: float,
    direction: Direction = Direction.FORWARD,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> BoundaryPair:
    """
    Integrate the radial equation across a segment with adaptive RK4(5).

    The second-order equation is stepped as the complex first-order system
    y = (g, g'). Profiles without analytic derivatives use a central difference
    with step FD_STEP_FRACTION * thickness.

    Raises:
        StiffnessError: the step size underflows or the step budget runs out
    """
    coeffs = radial_coefficients(segment, l, free_space_wavenumber(frequency))
    p, q = coeffs.for_family(family)

    def rhs(r: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -p(r) * y[1] - q(r) * y[0]], dtype=complex)

    r0, r1 = _segment_ends(segment, direction)
    y0 = np.array([ic.value, ic.derivative], dtype=complex)
    solver = RK45(rhs, r0, y0, r1, rtol=options.rtol, atol=options.atol)

    steps = 0
    while solver.status == "running":
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise StiffnessError(f"integrator failed: {message}", radius=float(solver.t))
        if steps >= options.max_steps and solver.status == "running":
            raise StiffnessError(
                f"step budget of {options.max_steps} exhausted", radius=float(solver.t)
            )
    logger.debug(
        "%s l=%d numeric segment [%.6g, %.6g] m: %d steps",
        FAMILY_NAMES[family], l, segment.r_inner, segment.r_outer, steps,
    )
    return BoundaryPair(complex(solver.y[0]), complex(solver.y[1]))


def solve_segment(
    segment: LayerSegment,
    family: int,
    l: int,
    ic: BoundaryPair,
    frequency: float,
    direction: Direction = Direction.FORWARD,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> BoundaryPair:
    """Closed form for constant segments with real anisotropy, numeric otherwise"""
    if not options.force_numeric and isinstance(segment.profile, ConstantProfile):
        s = segment.profile.sample
        if s.is_isotropic:
            return solve_closed_isotropic(segment, family, l, ic, frequency, direction)
        if s.has_real_anisotropy_ratio:
            return solve_closed_anisotropic(segment, family, l, ic, frequency, direction)
    return solve_numeric(segment, family, l, ic, frequency, direction, options)


# ---------------------------------------------------------------------------
# Stack propagation
# ---------------------------------------------------------------------------

def propagate_stack(
    geometry: ShellGeometry,
    family: int,
    l: int,
    direction: Direction,
    frequency: float,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> RadialBoundaryData:
    """
    Boundary data of g (TE) or h (TM) across the whole shell.

    Forward starts from the bubble initial condition at rb and runs to ra;
    backward starts from the exterior initial condition at ra and runs to rb.
    At each interface the value is continuous and the derivative is scaled by
    the ratio of transverse mu (TE) or eps (TM) across it.

    Raises:
        GeometryError: invalid geometry
        DegenerateModeError, StiffnessError: annotated with the segment index
    """
    _check_family(family)
    require_valid(geometry)
    if direction is Direction.FORWARD:
        start = initial_condition_forward(geometry, family, l, frequency)
        order = list(range(len(geometry.segments)))
    else:
        start = initial_condition_backward(geometry, family, l, frequency)
        order = list(range(len(geometry.segments) - 1, -1, -1))

    pair = start
    log_scale = 0j
    previous = None
    for index in order:
        segment = geometry.segments[index]
        entry_r = segment.r_inner if direction is Direction.FORWARD else segment.r_outer
        if previous is not None:
            before = _transverse(previous.at(entry_r), family)
            after = _transverse(segment.at(entry_r), family)
            pair = BoundaryPair(pair.value, pair.derivative * after / before)

        norm = pair.value if pair.value != 0 else pair.derivative
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateModeError(
                "radial function and derivative vanish at an interface",
                family=FAMILY_NAMES[family], l=l, segment=index,
            )
        log_scale += cmath.log(norm)
        pair = BoundaryPair(pair.value / norm, pair.derivative / norm)

        try:
            pair = solve_segment(segment, family, l, pair, frequency, direction, options)
        except DegenerateModeError as e:
            raise DegenerateModeError(
                e.reason, family=FAMILY_NAMES[family], l=l, segment=index
            ) from e
        except StiffnessError as e:
            raise StiffnessError(
                f"{FAMILY_NAMES[family]} l={l}: {e.reason}", radius=e.radius, segment=index
            ) from e
        previous = segment

    if pair.value == 0 or not (np.isfinite(pair.value) and np.isfinite(pair.derivative)):
        raise DegenerateModeError(
            "radial function vanishes or overflows at the far interface",
            family=FAMILY_NAMES[family], l=l, segment=order[-1],
        )
    return RadialBoundaryData(
        family=family,
        l=l,
        direction=direction,
        start=start,
        far=pair,
        log_scale=log_scale,
        segments_solved=len(order),
    )
