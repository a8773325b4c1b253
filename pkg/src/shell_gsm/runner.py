"""
Scenario execution: tasks, CSV outputs and the run manifest.

Every task writes its CSV files plus manifest.json into the output folder.
CSV content depends only on the scenario and its inputs; the manifest also
records hashes, library versions and timings.
"""

import csv
import hashlib
import logging
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy
from pydantic import BaseModel, Field

from . import config
from .errors import ConfigError
from .fields import (
    PlaneWaveSpec,
    bistatic_rcs,
    far_field_components,
    gain_pattern,
    monostatic_rcs,
    port_sparams,
    principal_cut,
    radiation_efficiency,
    to_db,
)
from .gsm import AntennaGSM, EffectiveGSM, compose_sweep, load_gsm, respond, save_gsm
from .media import ShellGeometry
from .oracles import CheckResult, validation_suite
from .radial import DEFAULT_OPTIONS, SolverOptions
from .scenario import ScenarioConfig, check_sweep, sweep_geometries
from .sso import SSOSet, assemble_sweep, default_lmax

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ("freq_hz", "theta_deg", "phi_deg", "quantity", "value_re", "value_im")
SPARAM_COLUMNS = ("freq_hz", "port_i", "port_j", "mag_db", "phase_deg")
SSO_COLUMNS = ("freq_hz", "tau", "l", "t_re", "t_im", "phi_re", "phi_im", "rho_re", "rho_im", "psi_re", "psi_im")
SWEEP_COLUMNS = ("point", "param_value") + SPARAM_COLUMNS
VALIDATION_COLUMNS = ("check", "passed", "value", "threshold", "detail")


class RunManifest(BaseModel):
    """Machine-readable record of one run"""
    tool: str = "shell-gsm"
    version: str
    python: str = Field(default_factory=platform.python_version)
    numpy: str = np.__version__
    scipy: str = scipy.__version__
    task: str
    created_utc: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    config_file: Optional[str] = None
    config_sha256: Optional[str] = None
    gsm_file: Optional[str] = None
    gsm_sha256: Optional[str] = None
    gsm_parse_count: int = 0
    lmax: Optional[int] = None
    frequencies_hz: List[float] = Field(default_factory=list)
    threads: int = 1
    rtol: float = config.DEFAULT_RTOL
    atol: float = config.DEFAULT_ATOL
    timings_s: Dict[str, float] = Field(default_factory=dict)
    sweep_point_seconds: List[float] = Field(default_factory=list)
    outputs: Dict[str, str] = Field(default_factory=dict)
    checks_failed: int = 0


@dataclass
class RunOptions:
    """Command-line overrides"""
    out_dir: Path = Path("out")
    threads: int = config.DEFAULT_THREADS
    lmax_override: Optional[int] = None
    tol: Optional[float] = None
    config_path: Optional[Path] = None

    @property
    def solver(self) -> SolverOptions:
        return DEFAULT_OPTIONS.with_tolerance(self.tol) if self.tol else DEFAULT_OPTIONS


@dataclass
class RunResult:
    manifest: RunManifest
    outputs: List[Path] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _package_version() -> str:
    from . import __version__

    return __version__


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write rows with a header; floats in shortest round-trip form"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


# ---------------------------------------------------------------------------
# Row builders
# ---------------------------------------------------------------------------

def sso_rows(ssos: Sequence[SSOSet]) -> List[Tuple]:
    rows = []
    for sso in ssos:
        for entry in sso.per_degree():
            values = []
            for name in ("t", "phi", "rho", "psi"):
                values += [entry[name].real, entry[name].imag]
            rows.append((float(sso.frequency), entry["tau"], entry["l"], *values))
    return rows


def sparam_rows(effs: Sequence[EffectiveGSM]) -> List[Tuple]:
    return [
        (float(r.frequency), r.port_i, r.port_j, float(r.mag_db), float(r.phase_deg))
        for r in port_sparams(effs)
    ]


def _cut_rows(frequency: float, theta: np.ndarray, phi: np.ndarray, quantity: str, values: np.ndarray) -> List[Tuple]:
    return [
        (float(frequency), float(np.degrees(t)), float(np.degrees(p)), quantity, float(np.real(v)), float(np.imag(v)))
        for t, p, v in zip(theta, phi, values)
    ]


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

class ScenarioRunner:
    """
    Runs one scenario task.

    The antenna GSM file is parsed at most once per runner, whatever the
    number of frequency or sweep points.
    """

    def __init__(self, cfg: ScenarioConfig, options: Optional[RunOptions] = None):
        self.cfg = cfg
        self.options = options or RunOptions()
        self.out_dir = Path(self.options.out_dir)
        self._antennas: Optional[List[AntennaGSM]] = None
        self.manifest = RunManifest(version=_package_version(), task="")
        self.manifest.threads = self.options.threads
        self.manifest.rtol = self.options.solver.rtol
        self.manifest.atol = self.options.solver.atol
        if self.options.config_path is not None:
            self.manifest.config_file = str(self.options.config_path)
            self.manifest.config_sha256 = sha256_file(Path(self.options.config_path))

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            self.manifest.timings_s[name] = self.manifest.timings_s.get(name, 0.0) + elapsed
            logger.debug("Stage %s took %.3f s", name, elapsed)

    # -- inputs -------------------------------------------------------------

    @cached_property
    def geometry(self) -> ShellGeometry:
        return self.cfg.geometry.to_geometry()

    @cached_property
    def frequencies(self) -> List[float]:
        return self.cfg.frequency.grid()

    def _file_antennas(self) -> List[AntennaGSM]:
        if self._antennas is None:
            path = self.cfg.gsm_path()
            if not path.is_file():
                raise ConfigError(f"antenna GSM file not found: {path}", key="antenna.gsm_file")
            with self.stage("load_gsm"):
                self._antennas = load_gsm(path)
            self.manifest.gsm_parse_count += 1
            self.manifest.gsm_file = str(path)
            self.manifest.gsm_sha256 = sha256_file(path)
        return self._antennas

    def resolve_lmax(self) -> int:
        """
        Truncation degree shared by antenna and shell.

        Raises:
            ConfigError: override disagrees with the GSM file, or the default
                rule exceeds the cap without an override
        """
        override = self.options.lmax_override or self.cfg.task.lmax
        if not self.cfg.antenna.is_builtin:
            file_lmax = self._file_antennas()[0].lmax
            if override is not None and override != file_lmax:
                raise ConfigError(
                    f"lmax {override} differs from the antenna GSM file's lmax {file_lmax}", key="task.lmax"
                )
            return file_lmax
        if override is not None:
            return override
        lmax = default_lmax(self.geometry, max(self.frequencies))
        if lmax > config.LMAX_CAP:
            raise ConfigError(
                f"truncation degree {lmax} exceeds the cap of {config.LMAX_CAP}; pass --lmax-override to accept it"
            )
        return lmax

    def antennas(self, lmax: int) -> List[AntennaGSM]:
        antenna = self.cfg.antenna
        if not antenna.is_builtin:
            return self._file_antennas()
        build = AntennaGSM.transparent if antenna.gsm_file == "transparent" else AntennaGSM.null
        bubble = self.geometry.bubble
        return [build(lmax, f, antenna.ports, bubble) for f in self.frequencies]

    def shell_operators(self, geometry: ShellGeometry, lmax: int) -> List[SSOSet]:
        with self.stage("sso"):
            return assemble_sweep(geometry, self.frequencies, lmax, self.options.solver, self.options.threads)

    def effective(self, geometry: ShellGeometry, lmax: int, antennas: List[AntennaGSM]) -> List[EffectiveGSM]:
        ssos = self.shell_operators(geometry, lmax)
        with self.stage("compose"):
            return compose_sweep(antennas, ssos, self.options.threads)

    def _write(self, name: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
        with self.stage("write"):
            return write_csv(self.out_dir / name, columns, rows)

    # -- tasks --------------------------------------------------------------

    def task_sso(self) -> List[Path]:
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        return [self._write("sso.csv", SSO_COLUMNS, sso_rows(self.shell_operators(self.geometry, lmax)))]

    def task_compose(self) -> List[Path]:
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        effs = self.effective(self.geometry, lmax, self.antennas(lmax))
        # referred to the exterior, the result can drive a further enclosing shell
        nested = [
            AntennaGSM(e.frequency, e.lmax, e.gamma, e.R, e.T, e.S, e.exterior) for e in effs
        ]
        path = self.out_dir / "effective_gsm.json"
        with self.stage("write"):
            save_gsm(nested, path)
        return [path, self._write("sparams.csv", SPARAM_COLUMNS, sparam_rows(effs))]

    def task_sparams(self) -> List[Path]:
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        effs = self.effective(self.geometry, lmax, self.antennas(lmax))
        return [self._write("sparams.csv", SPARAM_COLUMNS, sparam_rows(effs))]

    def _excitation(self, num_ports: int) -> np.ndarray:
        port = self.cfg.task.port
        if port > num_ports:
            raise ConfigError(f"port {port} exceeds the antenna's {num_ports} ports", key="task.port")
        v = np.zeros(num_ports, dtype=complex)
        v[port - 1] = 1.0
        return v

    def task_pattern(self) -> List[Path]:
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        effs = self.effective(self.geometry, lmax, self.antennas(lmax))
        rows, efficiency = [], []
        with self.stage("fields"):
            for eff in effs:
                v = self._excitation(eff.num_ports)
                f_f = respond(eff, v, np.zeros(eff.num_modes)).f_f
                for plane in self.cfg.task.planes:
                    cut = principal_cut(plane, self.cfg.task.resolution_deg)
                    gain = gain_pattern(eff, v, (cut.theta, cut.phi), db=True)
                    comps = far_field_components(f_f, cut.theta, cut.phi, eff.exterior)
                    rows += _cut_rows(eff.frequency, cut.theta, cut.phi, "gain_dbi", gain)
                    rows += _cut_rows(eff.frequency, cut.theta, cut.phi, "f_theta", comps[0])
                    rows += _cut_rows(eff.frequency, cut.theta, cut.phi, "f_phi", comps[1])
                efficiency.append((float(eff.frequency), self.cfg.task.port, radiation_efficiency(eff, v)))
        return [
            self._write("fields.csv", FIELD_COLUMNS, rows),
            self._write("efficiency.csv", ("freq_hz", "port", "efficiency"), efficiency),
        ]

    def incident_wave(self) -> PlaneWaveSpec:
        task = self.cfg.task
        pol = (1.0, 0.0) if task.polarization == "theta" else (0.0, 1.0)
        return PlaneWaveSpec(math.radians(task.theta_inc_deg), math.radians(task.phi_inc_deg), pol)

    def task_rcs(self) -> List[Path]:
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        effs = self.effective(self.geometry, lmax, self.antennas(lmax))
        spec = self.incident_wave()
        rows = []
        with self.stage("fields"):
            for eff in effs:
                for plane in self.cfg.task.planes:
                    cut = principal_cut(plane, self.cfg.task.resolution_deg)
                    sigma = bistatic_rcs(eff, spec, (cut.theta, cut.phi))
                    rows += _cut_rows(eff.frequency, cut.theta, cut.phi, "rcs_dbsm", to_db(sigma, power=True))
                back = monostatic_rcs(eff, spec)
                rows += _cut_rows(
                    eff.frequency,
                    np.array([math.pi - spec.theta_inc]),
                    np.array([(spec.phi_inc + math.pi) % (2 * math.pi)]),
                    "monostatic_rcs_dbsm",
                    np.array([to_db(back, power=True)]),
                )
        return [self._write("fields.csv", FIELD_COLUMNS, rows)]

    def task_sweep(self) -> List[Path]:
        try:
            check_sweep(self.cfg)
        except ValueError as e:
            raise ConfigError(str(e), key="task") from e
        lmax = self.resolve_lmax()
        self.manifest.lmax = lmax
        antennas = self.antennas(lmax)
        points = sweep_geometries(self.cfg)

        def one(item: Tuple[int, Tuple[float, ShellGeometry]]) -> Tuple[float, List[Tuple]]:
            index, (value, geometry) = item
            start = time.perf_counter()
            ssos = assemble_sweep(geometry, self.frequencies, lmax, self.options.solver)
            effs = compose_sweep(antennas, ssos)
            rows = [(index + 1, float(value), *row) for row in sparam_rows(effs)]
            elapsed = time.perf_counter() - start
            logger.info("Sweep point %d/%d (%s = %g) in %.3f s", index + 1, len(points), self.cfg.task.sweep_param, value, elapsed)
            return elapsed, rows

        with self.stage("sweep"):
            if self.options.threads > 1 and len(points) > 1:
                with ThreadPoolExecutor(max_workers=self.options.threads) as pool:
                    results = list(pool.map(one, enumerate(points)))
            else:
                results = [one(item) for item in enumerate(points)]

        self.manifest.sweep_point_seconds = [elapsed for elapsed, _ in results]
        rows = [row for _, point_rows in results for row in point_rows]
        return [self._write("sweep_sparams.csv", SWEEP_COLUMNS, rows)]

    def task_validate(self) -> Tuple[List[Path], List[CheckResult]]:
        task = self.cfg.task
        with self.stage("validate"):
            checks = validation_suite(frequency=self.frequencies[0], seed=task.seed, quick=task.quick)
        return [self._write("validation.csv", VALIDATION_COLUMNS, validation_rows(checks))], checks

    # -- entry --------------------------------------------------------------

    def run(self, kind: Optional[str] = None) -> RunResult:
        """
        Execute the task (the scenario's own kind unless one is given).

        Raises:
            ConfigError: no task kind, or task options inconsistent with the scenario
        """
        kind = kind or self.cfg.task.kind
        if kind is None:
            raise ConfigError("no task given: set [task] kind or use a task subcommand", key="task.kind")
        self.manifest.task = kind
        self.manifest.frequencies_hz = self.frequencies
        self.out_dir.mkdir(parents=True, exist_ok=True)
        logger.info("Running task %s over %d frequencies", kind, len(self.frequencies))

        checks: List[CheckResult] = []
        with self.stage("total"):
            if kind == "validate":
                outputs, checks = self.task_validate()
            else:
                outputs = getattr(self, f"task_{kind}")()
        return finish(self.manifest, self.out_dir, outputs, checks)


def validation_rows(checks: Sequence[CheckResult]) -> List[Tuple]:
    return [(c.name, str(c.passed).lower(), float(c.value), float(c.threshold), c.detail) for c in checks]


def finish(manifest: RunManifest, out_dir: Path, outputs: List[Path], checks: Sequence[CheckResult]) -> RunResult:
    """Record output hashes and write manifest.json"""
    manifest.outputs = {p.name: sha256_file(p) for p in outputs}
    manifest.checks_failed = sum(not c.passed for c in checks)
    path = out_dir / "manifest.json"
    path.write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return RunResult(manifest, [*outputs, path], list(checks))


def run_validation(options: RunOptions, frequency: float = 3.5e9, seed: int = 0, quick: bool = True) -> RunResult:
    """Validation suite without a scenario file"""
    out_dir = Path(options.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(version=_package_version(), task="validate", threads=options.threads)
    manifest.frequencies_hz = [frequency]
    start = time.perf_counter()
    checks = validation_suite(frequency=frequency, seed=seed, quick=quick)
    manifest.timings_s["validate"] = time.perf_counter() - start
    path = write_csv(out_dir / "validation.csv", VALIDATION_COLUMNS, validation_rows(checks))
    return finish(manifest, out_dir, [path], checks)
