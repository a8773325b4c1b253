"""
Scenario files: geometry, frequency grid, antenna and task in one TOML file.

    [geometry]
    rb_mm = 150
    ra_mm = 180

    [[geometry.layers]]
    type = "iso"
    thickness_mm = 30
    eps = "5-0.5j"

    [frequency]
    start_ghz = 3.2
    stop_ghz = 3.8
    points = 7

    [antenna]
    gsm_file = "transparent"

    [task]
    kind = "sparams"

Complex values may be written as numbers, as Python-style strings ("5-0.5j")
or as [re, im] pairs. Profile layers take expression strings of r in meters.
"""

import logging
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, ExpressionError
from .expressions import profile_from_expressions
from .media import HomogeneousRegion, ShellGeometry, isotropic, uniaxial, with_layer_values
from .sso import frequency_grid

logger = logging.getLogger(__name__)

ComplexInput = Union[float, str, List[float]]

LAYER_TYPES = ("iso", "uniaxial", "profile")
TASK_KINDS = ("sso", "compose", "sparams", "pattern", "rcs", "validate", "sweep")
BUILTIN_ANTENNAS = ("transparent", "null")
SWEEP_PARAMS = {
    "eps_perp_re": (("eps_perp",), "real"),
    "eps_perp_im": (("eps_perp",), "imag"),
    "eps_r_re": (("eps_r",), "real"),
    "eps_r_im": (("eps_r",), "imag"),
    "mu_perp_re": (("mu_perp",), "real"),
    "mu_perp_im": (("mu_perp",), "imag"),
    "mu_r_re": (("mu_r",), "real"),
    "mu_r_im": (("mu_r",), "imag"),
    "eps_re": (("eps_perp", "eps_r"), "real"),
    "eps_im": (("eps_perp", "eps_r"), "imag"),
    "mu_re": (("mu_perp", "mu_r"), "real"),
    "mu_im": (("mu_perp", "mu_r"), "imag"),
}


def to_complex(value: ComplexInput) -> complex:
    """Number, "a+bj" string or [re, im] pair to complex"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must be [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ValueError(f"not a complex number: '{value}'") from None
    return complex(value)


def _check_complex(value: Optional[ComplexInput]) -> Optional[ComplexInput]:
    if value is not None:
        z = to_complex(value)
        if z == 0:
            raise ValueError("constitutive values must be nonzero")
    return value


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

class RegionConfig(BaseModel):
    """Bubble or exterior medium"""
    model_config = ConfigDict(extra="forbid")

    eps: ComplexInput = 1.0
    mu: ComplexInput = 1.0

    @field_validator("eps", "mu")
    @classmethod
    def nonzero(cls, v: ComplexInput) -> ComplexInput:
        return _check_complex(v)

    def to_region(self) -> HomogeneousRegion:
        return HomogeneousRegion(to_complex(self.eps), to_complex(self.mu))


class LayerConfig(BaseModel):
    """
    One layer, innermost first.

    iso: eps, mu. uniaxial: eps_perp, eps_r, mu_perp, mu_r. profile: the same
    four keys as expression strings of r (m).
    """
    model_config = ConfigDict(extra="forbid")

    type: str
    thickness_mm: float = Field(gt=0)
    eps: Optional[ComplexInput] = None
    mu: Optional[ComplexInput] = None
    eps_perp: Optional[ComplexInput] = None
    eps_r: Optional[ComplexInput] = None
    mu_perp: Optional[ComplexInput] = None
    mu_r: Optional[ComplexInput] = None

    @field_validator("type")
    @classmethod
    def known_type(cls, v: str) -> str:
        if v not in LAYER_TYPES:
            raise ValueError(
                f"unknown layer type '{v}': only radially uniaxial media are supported "
                f"(epsilon and mu diagonal with one radial and one transverse value); "
                f"use one of {', '.join(LAYER_TYPES)}"
            )
        return v

    @model_validator(mode="after")
    def keys_match_type(self) -> "LayerConfig":
        iso_keys = {"eps", "mu"}
        aniso_keys = {"eps_perp", "eps_r", "mu_perp", "mu_r"}
        given = {k for k in iso_keys | aniso_keys if getattr(self, k) is not None}
        if self.type == "iso":
            if given - iso_keys:
                raise ValueError(f"iso layer takes eps and mu only, got {sorted(given - iso_keys)}")
            if self.eps is None:
                raise ValueError("iso layer needs eps")
        else:
            if given - aniso_keys:
                raise ValueError(f"{self.type} layer takes eps_perp, eps_r, mu_perp, mu_r, got {sorted(given - aniso_keys)}")
            if self.eps_perp is None or self.eps_r is None:
                raise ValueError(f"{self.type} layer needs eps_perp and eps_r")
        if self.type != "profile":
            for key in given:
                _check_complex(getattr(self, key))
        return self

    def to_profile(self):
        if self.type == "iso":
            return isotropic(to_complex(self.eps), to_complex(self.mu if self.mu is not None else 1.0))
        if self.type == "uniaxial":
            return uniaxial(
                eps_perp=to_complex(self.eps_perp),
                eps_r=to_complex(self.eps_r),
                mu_perp=to_complex(self.mu_perp if self.mu_perp is not None else 1.0),
                mu_r=to_complex(self.mu_r if self.mu_r is not None else 1.0),
            )
        return profile_from_expressions(
            *(str(v) if v is not None else "1" for v in (self.eps_perp, self.eps_r, self.mu_perp, self.mu_r))
        )


class GeometryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rb_mm: float = Field(gt=0)
    ra_mm: float = Field(gt=0)
    bubble: RegionConfig = Field(default_factory=RegionConfig)
    exterior: RegionConfig = Field(default_factory=RegionConfig)
    layers: List[LayerConfig] = Field(min_length=1)

    @model_validator(mode="after")
    def layers_tile_shell(self) -> "GeometryConfig":
        if self.ra_mm <= self.rb_mm:
            raise ValueError(f"ra_mm ({self.ra_mm}) must exceed rb_mm ({self.rb_mm})")
        total = sum(layer.thickness_mm for layer in self.layers)
        if abs(total - (self.ra_mm - self.rb_mm)) > 1e-9 * self.ra_mm:
            raise ValueError(
                f"layer thicknesses sum to {total:g} mm but ra_mm - rb_mm = {self.ra_mm - self.rb_mm:g} mm"
            )
        return self

    def to_geometry(self) -> ShellGeometry:
        """Shell in meters; the last layer ends exactly at ra"""
        layers = [(layer.thickness_mm * 1e-3, layer.to_profile()) for layer in self.layers]
        geometry = ShellGeometry.from_layers(
            self.rb_mm * 1e-3, layers, self.bubble.to_region(), self.exterior.to_region()
        )
        return snap_outer_radius(geometry, self.ra_mm * 1e-3)


class FrequencyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    start_ghz: float = Field(gt=0)
    stop_ghz: float = Field(gt=0)
    points: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def increasing(self) -> "FrequencyConfig":
        if self.stop_ghz < self.start_ghz:
            raise ValueError(f"stop_ghz ({self.stop_ghz}) is below start_ghz ({self.start_ghz})")
        return self

    def grid(self) -> List[float]:
        """Frequencies in Hz"""
        return list(frequency_grid(self.start_ghz * 1e9, self.stop_ghz * 1e9, self.points))


class AntennaConfig(BaseModel):
    """gsm_file: path to an interchange file, or "transparent" / "null" """
    model_config = ConfigDict(extra="forbid")

    gsm_file: str = "transparent"
    ports: int = Field(default=1, ge=1)

    @property
    def is_builtin(self) -> bool:
        return self.gsm_file in BUILTIN_ANTENNAS


class TaskConfig(BaseModel):
    """Task selection and per-task options"""
    model_config = ConfigDict(extra="forbid")

    kind: Optional[Literal["sso", "compose", "sparams", "pattern", "rcs", "validate", "sweep"]] = None
    lmax: Optional[int] = Field(default=None, ge=1)

    # pattern
    port: int = Field(default=1, ge=1)
    planes: List[Literal["xoz", "yoz", "xoy"]] = Field(default_factory=lambda: ["xoz", "yoz", "xoy"])
    resolution_deg: float = Field(default=1.0, gt=0, le=90)

    # rcs
    theta_inc_deg: float = Field(default=0.0, ge=0, le=180)
    phi_inc_deg: float = 0.0
    polarization: Literal["theta", "phi"] = "theta"

    # validate
    quick: bool = True
    seed: int = 0

    # sweep
    sweep_layer: Optional[int] = Field(default=None, ge=1)
    sweep_param: Optional[str] = None
    sweep_values: List[float] = Field(default_factory=list)

    @field_validator("sweep_param")
    @classmethod
    def known_param(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and v not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep_param '{v}', expected one of {', '.join(SWEEP_PARAMS)}")
        return v


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    geometry: GeometryConfig
    frequency: FrequencyConfig
    antenna: AntennaConfig = Field(default_factory=AntennaConfig)
    task: TaskConfig = Field(default_factory=TaskConfig)

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @model_validator(mode="after")
    def sweep_complete(self) -> "ScenarioConfig":
        if self.task.kind == "sweep":
            check_sweep(self)
        return self

    @property
    def base_dir(self) -> Path:
        return self._base_dir

    def gsm_path(self) -> Optional[Path]:
        """Absolute path of the antenna file, relative paths taken from the scenario's folder"""
        if self.antenna.is_builtin:
            return None
        path = Path(self.antenna.gsm_file)
        return path if path.is_absolute() else self._base_dir / path


def check_sweep(cfg: ScenarioConfig) -> None:
    """Sweep options present and pointing at a constant layer"""
    task = cfg.task
    if task.sweep_layer is None or task.sweep_param is None or not task.sweep_values:
        raise ValueError("sweep needs sweep_layer, sweep_param and a nonempty sweep_values list")
    if task.sweep_layer > len(cfg.geometry.layers):
        raise ValueError(f"sweep_layer {task.sweep_layer} exceeds the {len(cfg.geometry.layers)} layers")
    layer = cfg.geometry.layers[task.sweep_layer - 1]
    if layer.type == "profile":
        raise ValueError(f"sweep_layer {task.sweep_layer} is a profile layer; sweeps act on constant layers")


def snap_outer_radius(geometry: ShellGeometry, ra: float) -> ShellGeometry:
    """Pin the last segment's outer radius to ra (summing thicknesses rounds)"""
    last = geometry.segments[-1]
    segments = geometry.segments[:-1] + (replace(last, r_outer=ra),)
    return replace(geometry, ra=ra, segments=segments)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOML_POSITION = re.compile(r"\(at line (\d+), column (\d+)\)")


def locate(text: str, loc: Sequence[Any]) -> Optional[int]:
    """
    1-based line of a pydantic error location in the TOML source.

    Walks table headers and keys in order; returns the deepest line found.
    """
    lines = text.splitlines()
    line_no = None
    start = 0
    prefix = ""
    i = 0
    parts = list(loc)
    while i < len(parts):
        part = parts[i]
        if not isinstance(part, str):
            i += 1
            continue
        dotted = f"{prefix}.{part}" if prefix else part
        index = parts[i + 1] if i + 1 < len(parts) and isinstance(parts[i + 1], int) else None
        if index is not None:
            header = re.compile(rf"^\s*\[\[\s*{re.escape(dotted)}\s*\]\]")
            hits = [n for n, line in enumerate(lines) if header.match(line)]
            if index < len(hits):
                start = hits[index]
                line_no = start + 1
                prefix = dotted
                i += 2
                continue
        header = re.compile(rf"^\s*\[\s*{re.escape(dotted)}\s*\]")
        key = re.compile(rf"^\s*{re.escape(str(part))}\s*=")
        found = None
        for n in range(start, len(lines)):
            if header.match(lines[n]):
                found, prefix = n, dotted
                break
            if key.match(lines[n]):
                found = n
                break
        if found is None:
            break
        start, line_no = found, found + 1
        i += 1
    return line_no


def _key_path(loc: Sequence[Any]) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part + 1}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def loads_config(text: str, base_dir: Optional[Path] = None) -> ScenarioConfig:
    """
    Parse scenario text.

    Raises:
        ConfigError: TOML syntax error or invalid content, with line and
            column when known and the dotted key path
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = _TOML_POSITION.search(str(e))
        line, column = (int(match.group(1)), int(match.group(2))) if match else (None, None)
        message = _TOML_POSITION.sub("", str(e)).strip()
        raise ConfigError(f"syntax error: {message}", line=line, column=column) from e

    try:
        cfg = ScenarioConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [p for p in first["loc"] if not (isinstance(p, str) and p.startswith("function-"))]
        message = first["msg"].removeprefix("Value error, ")
        if first["type"] == "extra_forbidden":
            message = "unknown key"
        elif first["type"] == "missing":
            message = "missing key"
        raise ConfigError(message, line=locate(text, loc), key=_key_path(loc) or None) from e

    if base_dir is not None:
        cfg._base_dir = Path(base_dir)
    try:
        cfg.geometry.to_geometry()
    except ExpressionError as e:
        raise ConfigError(f"profile expression: {e}", column=e.column, key="geometry.layers") from e
    return cfg


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Read and validate a scenario file.

    Raises:
        ConfigError: unreadable file, syntax error, unknown key or invariant violation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e.strerror}") from e
    cfg = loads_config(text, base_dir=path.resolve().parent)
    logger.info("Loaded scenario %s (%d layers, %d frequencies)", path, len(cfg.geometry.layers), cfg.frequency.points)
    return cfg


def sweep_geometries(cfg: ScenarioConfig) -> List[Tuple[float, ShellGeometry]]:
    """(parameter value, geometry) for every sweep point"""
    base = cfg.geometry.to_geometry()
    index = cfg.task.sweep_layer - 1
    keys, part = SWEEP_PARAMS[cfg.task.sweep_param]
    sample = base.segments[index].profile.sample
    out = []
    for value in cfg.task.sweep_values:
        overrides: Dict[str, complex] = {}
        for key in keys:
            current = getattr(sample, key)
            overrides[key] = complex(value, current.imag) if part == "real" else complex(current.real, value)
        out.append((value, with_layer_values(base, index, **overrides)))
    return out
