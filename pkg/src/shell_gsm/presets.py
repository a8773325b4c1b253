"""
Reference shell geometries

Vacuum bubble of radius 150 mm inside vacuum, shells ending at 180 mm:

    lossy_dielectric_shell     isotropic eps = 5 - 0.5j
    uniaxial_shell             eps_r = 2, eps_perp = 5, mu_r = 1, mu_perp = 3
    two_layer_isotropic_shell  15 mm of eps = 4.4 - 0.604j, then 15 mm of eps = 10
    two_layer_uniaxial_shell   (2, 4.4, 2.2, 2.2) then (1, 8, 2, 5) as (eps_r, eps_perp, mu_r, mu_perp)
    graded_shell               two continuously varying uniaxial layers (r in meters)
"""

import math

import numpy as np

from .media import (
    VACUUM,
    HomogeneousRegion,
    ShellGeometry,
    isotropic,
    radial_profile,
    uniaxial,
)

RB = 0.150
RA = 0.180
MID = 0.165


def lossy_dielectric_shell(eps: complex = 5 - 0.5j) -> ShellGeometry:
    return ShellGeometry.homogeneous(RB, RA, isotropic(eps))


def uniaxial_shell() -> ShellGeometry:
    return ShellGeometry.homogeneous(RB, RA, uniaxial(eps_perp=5, eps_r=2, mu_perp=3, mu_r=1))


def two_layer_isotropic_shell() -> ShellGeometry:
    return ShellGeometry.from_layers(RB, [(MID - RB, isotropic(4.4 - 0.604j)), (RA - MID, isotropic(10))])


def two_layer_uniaxial_shell(
    bubble: HomogeneousRegion = VACUUM, exterior: HomogeneousRegion = VACUUM
) -> ShellGeometry:
    return ShellGeometry.from_layers(
        RB,
        [
            (MID - RB, uniaxial(eps_perp=4.4, eps_r=2, mu_perp=2.2, mu_r=2.2)),
            (RA - MID, uniaxial(eps_perp=8, eps_r=1, mu_perp=5, mu_r=2)),
        ],
        bubble=bubble,
        exterior=exterior,
    )


def solid_sphere(eps: complex, mu: complex = 1.0, radius: float = RA, exterior: HomogeneousRegion = VACUUM) -> ShellGeometry:
    """Homogeneous sphere: bubble and shell share one medium"""
    return ShellGeometry.homogeneous(
        RB * radius / RA, radius, isotropic(eps, mu), bubble=HomogeneousRegion(eps, mu), exterior=exterior
    )


# graded layer 1 on [150, 165] mm
def _eps_perp_1(r: float) -> float:
    return 5 * math.tan(math.pi / (5 * r))


def _d_eps_perp_1(r: float) -> float:
    return -5 * math.pi / (5 * r * r) / math.cos(math.pi / (5 * r)) ** 2


def _eps_r_1(r: float) -> float:
    return 1 + math.exp(2 * math.sin(4 / r))


# graded layer 2 on [165, 180] mm
def _eps_perp_2(r: float) -> float:
    return 2 + math.log(2 / r - 5)


def _d_eps_perp_2(r: float) -> float:
    return (-2 / (r * r)) / (2 / r - 5)


def _eps_r_2(r: float) -> float:
    return 1 / r


GRADED_LAYER_1 = radial_profile(
    _eps_perp_1, _eps_r_1, d_eps_perp=_d_eps_perp_1, label="5 tan(pi/(5r)) | 1 + exp(2 sin(4/r))",
)
GRADED_LAYER_2 = radial_profile(
    _eps_perp_2, _eps_r_2, d_eps_perp=_d_eps_perp_2, label="2 + ln(2/r - 5) | 1/r",
)


def graded_shell() -> ShellGeometry:
    return ShellGeometry.from_layers(RB, [(MID - RB, GRADED_LAYER_1), (RA - MID, GRADED_LAYER_2)])


def random_uniaxial_stack(
    rng: np.random.Generator, layers: int = 3, lossy: bool = False
) -> ShellGeometry:
    """
    Random stack of constant uniaxial layers between 150 and 180 mm.

    Values are drawn in [1, 6). Lossy stacks scale eps_perp and eps_r by a
    common factor 1 - j delta so the anisotropy ratio stays real.
    """
    edges = np.sort(rng.uniform(RB, RA, layers - 1))
    radii = [RB, *edges.tolist(), RA]
    out = []
    for inner, outer in zip(radii[:-1], radii[1:]):
        values = rng.uniform(1.0, 6.0, 4)
        delta = rng.uniform(0.02, 0.3) if lossy else 0.0
        out.append(
            (
                outer - inner,
                uniaxial(
                    eps_perp=values[0] * (1 - 1j * delta),
                    eps_r=values[1] * (1 - 1j * delta),
                    mu_perp=values[2],
                    mu_r=values[3],
                ),
            )
        )
    return ShellGeometry.from_layers(RB, out)
