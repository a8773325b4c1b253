"""
shell-gsm - Antennas inside layered spherical shells

Computes the spherical scattering operators (t, Phi, rho, Psi) of a radially
stratified, uniaxially anisotropic shell and composes them with an antenna's
free-space generalized scattering matrix. Changing the shell only means
recomputing the operators; the antenna is characterized once.

Usage:
    from shell_gsm import assemble, compose, load_gsm, presets

    geometry = presets.lossy_dielectric_shell()
    sso = assemble(geometry, 3.5e9)
    antenna = load_gsm("horn.json")[0]
    effective = compose(antenna, sso)
    print(effective.gamma)

CLI:
    $ shellgsm init shell.toml
    $ shellgsm sparams --config shell.toml --out results/
    $ shellgsm validate
"""

__version__ = "0.1.0"
__author__ = "shell-gsm contributors"

from .errors import (
    ShellGSMError,
    DomainError,
    GeometryError,
    DegenerateModeError,
    StiffnessError,
    CompositionError,
    GSMFormatError,
    ConfigError,
    ExpressionError,
)

from .specfun import (
    TE,
    TM,
    ModeIndex,
    Parity,
    RiccatiPair,
    mode_count,
    canonical_modes,
    riccati_psi,
    riccati_xi,
    legendre_normalized,
    scalar_harmonic,
    vector_harmonic,
    radial_function,
    truncation_degree,
)

from .media import (
    MediumSample,
    HomogeneousRegion,
    LayerSegment,
    ShellGeometry,
    RadialProfile,
    VACUUM,
    isotropic,
    uniaxial,
    radial_profile,
    sample,
    staircase,
    validate,
)

from .radial import (
    Direction,
    SolverOptions,
    RadialBoundaryData,
    initial_condition_forward,
    initial_condition_backward,
    anisotropic_orders,
    solve_segment,
    propagate_stack,
)

from .sso import (
    SSOSet,
    assemble,
    assemble_sweep,
    transition_entries,
    inward_entries,
    reflection_entries,
    outward_entries,
)

from .gsm import (
    AntennaGSM,
    EffectiveGSM,
    compose,
    compose_sweep,
    respond,
    load_gsm,
    save_gsm,
)

from .fields import (
    PlaneWaveSpec,
    plane_wave_coefficients,
    far_field,
    gain_pattern,
    bistatic_rcs,
    port_sparams,
)

from .oracles import (
    mie_solid_sphere,
    neumann_compose,
    staircase_convergence,
    staircase_is_monotone,
    validation_suite,
)

from .expressions import Expression, expression_eval
from .scenario import ScenarioConfig, parse_config
from .runner import RunOptions, ScenarioRunner

from . import presets


__all__ = [
    # Version
    "__version__",

    # Errors
    "ShellGSMError",
    "DomainError",
    "GeometryError",
    "DegenerateModeError",
    "StiffnessError",
    "CompositionError",
    "GSMFormatError",
    "ConfigError",
    "ExpressionError",

    # Special functions
    "TE",
    "TM",
    "ModeIndex",
    "Parity",
    "RiccatiPair",
    "mode_count",
    "canonical_modes",
    "riccati_psi",
    "riccati_xi",
    "legendre_normalized",
    "scalar_harmonic",
    "vector_harmonic",
    "radial_function",
    "truncation_degree",

    # Media
    "MediumSample",
    "HomogeneousRegion",
    "LayerSegment",
    "ShellGeometry",
    "RadialProfile",
    "VACUUM",
    "isotropic",
    "uniaxial",
    "radial_profile",
    "sample",
    "staircase",
    "validate",

    # Radial solver
    "Direction",
    "SolverOptions",
    "RadialBoundaryData",
    "initial_condition_forward",
    "initial_condition_backward",
    "anisotropic_orders",
    "solve_segment",
    "propagate_stack",

    # Shell operators
    "SSOSet",
    "assemble",
    "assemble_sweep",
    "transition_entries",
    "inward_entries",
    "reflection_entries",
    "outward_entries",

    # GSM composition
    "AntennaGSM",
    "EffectiveGSM",
    "compose",
    "compose_sweep",
    "respond",
    "load_gsm",
    "save_gsm",

    # Fields
    "PlaneWaveSpec",
    "plane_wave_coefficients",
    "far_field",
    "gain_pattern",
    "bistatic_rcs",
    "port_sparams",

    # Oracles
    "mie_solid_sphere",
    "neumann_compose",
    "staircase_convergence",
    "staircase_is_monotone",
    "validation_suite",

    # Scenarios
    "Expression",
    "expression_eval",
    "ScenarioConfig",
    "parse_config",
    "RunOptions",
    "ScenarioRunner",
    "presets",
]
