"""
Antenna generalized scattering matrices and their composition with a shell

An antenna GSM relates port amplitudes v, w and spherical-wave amplitudes
a (regular), f (outgoing) in the bubble:

    w = Gamma v + 1/2 R a
    f = T v + 1/2 (S - 1) a

Composing with the shell operators gives the effective GSM of the embedded
system with the same block structure, now referred to the exterior medium.
"""

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import get_lapack_funcs

from . import config
from .errors import CompositionError, DomainError, GSMFormatError
from .media import VACUUM, HomogeneousRegion
from .specfun import ModeIndex, Parity, mode_count
from .sso import SSOSet

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# ---------------------------------------------------------------------------
# Mode indexing
# ---------------------------------------------------------------------------

def mode_index(tau: int, sigma: Union[Parity, str], m: int, l: int) -> int:
    """Canonical linear index of mode (tau, sigma, m, l)"""
    return ModeIndex(tau, Parity(sigma), m, l).linear


def mode_unindex(linear: int) -> Tuple[int, str, int, int]:
    """(tau, sigma, m, l) of a canonical linear index; sigma is 'e' or 'o'"""
    n = ModeIndex.from_linear(linear)
    return n.tau, n.sigma.value, n.m, n.l


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GSMBlocks:
    """Gamma (P x P), R (P x N), T (N x P), S (N x N) at one frequency"""
    frequency: float
    lmax: int
    gamma: np.ndarray
    R: np.ndarray
    T: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        for name in ("gamma", "R", "T", "S"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        n = mode_count(self.lmax)
        p = self.gamma.shape[0] if self.gamma.ndim == 2 else -1
        expected = {"gamma": (p, p), "R": (p, n), "T": (n, p), "S": (n, n)}
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise DomainError(
                    f"{name} has shape {getattr(self, name).shape}, expected {shape} "
                    f"for {p} ports and lmax={self.lmax}"
                )

    @property
    def num_ports(self) -> int:
        return self.gamma.shape[0]

    @property
    def num_modes(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True, eq=False)
class AntennaGSM(GSMBlocks):
    """Free-space GSM of the antenna alone, evaluated in the bubble medium"""
    bubble: HomogeneousRegion = VACUUM

    @classmethod
    def transparent(
        cls, lmax: int, frequency: float, num_ports: int = 1, bubble: HomogeneousRegion = VACUUM
    ) -> "AntennaGSM":
        """No scatterer: S = 1, T = 0, R = 0, Gamma = 0"""
        n = mode_count(lmax)
        return cls(
            frequency, lmax,
            np.zeros((num_ports, num_ports)), np.zeros((num_ports, n)),
            np.zeros((n, num_ports)), np.eye(n), bubble,
        )

    @classmethod
    def null(
        cls, lmax: int, frequency: float, num_ports: int = 1, bubble: HomogeneousRegion = VACUUM
    ) -> "AntennaGSM":
        """Totally reflecting, decoupled port: S = 1, T = 0, R = 0, Gamma = 1"""
        base = cls.transparent(lmax, frequency, num_ports, bubble)
        return cls(frequency, lmax, np.eye(num_ports), base.R, base.T, base.S, bubble)

    @classmethod
    def random(
        cls,
        lmax: int,
        frequency: float,
        num_ports: int = 1,
        seed: int = 0,
        contrast: float = 0.8,
        bubble: HomogeneousRegion = VACUUM,
        active_lmax: Optional[int] = None,
    ) -> "AntennaGSM":
        """
        Random GSM with spectral norm of S - 1 equal to `contrast`.

        With `active_lmax`, R, T and S - 1 only couple modes of degree up to
        active_lmax, as for a physically small antenna; higher modes pass
        through untouched. Otherwise every block is dense.

        Intended for algebraic checks; it is not constrained to be passive.
        """
        if active_lmax is not None and active_lmax < 1:
            raise DomainError(f"active_lmax must be at least 1, got {active_lmax}")
        rng = np.random.default_rng(seed)
        n = mode_count(lmax)
        active = n if active_lmax is None else mode_count(min(active_lmax, lmax))

        def block(rows: int, cols: int) -> np.ndarray:
            return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2 * max(rows, cols))

        d = np.zeros((n, n), dtype=complex)
        d[:active, :active] = block(active, active)
        d *= contrast / np.linalg.norm(d, 2)
        gamma = block(num_ports, num_ports)
        r = np.zeros((num_ports, n), dtype=complex)
        r[:, :active] = block(num_ports, active)
        t = np.zeros((n, num_ports), dtype=complex)
        t[:active] = block(active, num_ports)
        return cls(frequency, lmax, gamma, r, t, np.eye(n) + d, bubble)


@dataclass(frozen=True, eq=False)
class EffectiveGSM(GSMBlocks):
    """GSM of antenna plus shell, referred to the exterior medium"""
    exterior: HomogeneousRegion = VACUUM


@dataclass(frozen=True, eq=False)
class SystemResponse:
    """Reflected port amplitudes w and outgoing exterior amplitudes f_f"""
    w: np.ndarray
    f_f: np.ndarray


# ---------------------------------------------------------------------------
# Interchange file
# ---------------------------------------------------------------------------

ComplexPair = Tuple[float, float]
Matrix = List[List[ComplexPair]]


class GSMBlockModel(BaseModel):
    """One frequency: every matrix row-major, entries as [re, im]"""
    model_config = ConfigDict(extra="forbid")

    gamma: Matrix
    r: Matrix
    t: Matrix
    s: Matrix


class GSMFileModel(BaseModel):
    """GSM interchange file, format version 1"""
    model_config = ConfigDict(extra="forbid")

    format_version: int
    lmax: int
    num_ports: int
    mode_ordering: str
    bubble_eps: ComplexPair = (1.0, 0.0)
    bubble_mu: ComplexPair = (1.0, 0.0)
    frequencies_hz: List[float]
    blocks: List[GSMBlockModel]

    @field_validator("format_version")
    @classmethod
    def known_version(cls, v: int) -> int:
        if v != config.GSM_FORMAT_VERSION:
            raise ValueError(f"unknown format_version {v}, expected {config.GSM_FORMAT_VERSION}")
        return v

    @field_validator("mode_ordering")
    @classmethod
    def known_ordering(cls, v: str) -> str:
        if v != config.MODE_ORDERING:
            raise ValueError(f"unknown mode_ordering '{v}', expected '{config.MODE_ORDERING}'")
        return v

    @field_validator("lmax", "num_ports")
    @classmethod
    def positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v


def _to_pairs(matrix: np.ndarray) -> Matrix:
    return [[(float(z.real), float(z.imag)) for z in row] for row in matrix]


def _from_pairs(pairs: Matrix) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.size == 0:
        return np.zeros((len(pairs), 0), dtype=complex)
    return arr[..., 0] + 1j * arr[..., 1]


def _loc_to_block(loc: Sequence) -> str:
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path


def _truncation_point(text: str, pos: int) -> Optional[str]:
    """Name the block being read at a decode failure, e.g. 'blocks[2].s'"""
    head = text[:pos]
    count = head.count('"gamma"')
    if count == 0:
        return None
    keys = list(re.finditer(r'"(gamma|r|t|s)"\s*:', head))
    last = keys[-1].group(1) if keys else "gamma"
    return f"blocks[{count - 1}].{last}"


def save_gsm(gsms: Sequence[AntennaGSM], path: PathLike) -> None:
    """
    Write per-frequency antenna GSMs to one interchange file.

    Floats are written with repr, the shortest text that round-trips exactly.
    """
    if not gsms:
        raise DomainError("no GSMs to save")
    first = gsms[0]
    for g in gsms[1:]:
        if g.lmax != first.lmax or g.num_ports != first.num_ports or g.bubble != first.bubble:
            raise DomainError("all GSMs in one file must share lmax, port count and bubble medium")

    model = GSMFileModel(
        format_version=config.GSM_FORMAT_VERSION,
        lmax=first.lmax,
        num_ports=first.num_ports,
        mode_ordering=config.MODE_ORDERING,
        bubble_eps=(first.bubble.eps.real, first.bubble.eps.imag),
        bubble_mu=(first.bubble.mu.real, first.bubble.mu.imag),
        frequencies_hz=[float(g.frequency) for g in gsms],
        blocks=[
            GSMBlockModel(gamma=_to_pairs(g.gamma), r=_to_pairs(g.R), t=_to_pairs(g.T), s=_to_pairs(g.S))
            for g in gsms
        ],
    )
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model.model_dump(mode="json"), f)
    logger.info("Saved %d GSM blocks (lmax=%d, P=%d) to %s", len(gsms), first.lmax, first.num_ports, path)


def load_gsm(path: PathLike) -> List[AntennaGSM]:
    """
    Read an interchange file into per-frequency antenna GSMs.

    Raises:
        GSMFormatError: malformed or truncated file, unknown version or
            ordering, dimension mismatch; `block` names the offending block
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise GSMFormatError(
            f"truncated or malformed GSM file at line {e.lineno} column {e.colno}",
            block=_truncation_point(text, e.pos),
        ) from e

    try:
        model = GSMFileModel.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        block = _loc_to_block(first["loc"])
        kind = "missing" if first["type"] == "missing" else "invalid"
        raise GSMFormatError(f"{kind} field: {first['msg']}", block=block) from e

    if len(model.blocks) != len(model.frequencies_hz):
        missing = f"blocks[{len(model.blocks)}]" if len(model.blocks) < len(model.frequencies_hz) else "blocks"
        raise GSMFormatError(
            f"{len(model.frequencies_hz)} frequencies but {len(model.blocks)} blocks", block=missing
        )

    bubble = HomogeneousRegion(complex(*model.bubble_eps), complex(*model.bubble_mu))
    n, p = mode_count(model.lmax), model.num_ports
    expected = {"gamma": (p, p), "r": (p, n), "t": (n, p), "s": (n, n)}
    gsms = []
    for i, (frequency, blk) in enumerate(zip(model.frequencies_hz, model.blocks)):
        mats = {}
        for name, shape in expected.items():
            try:
                mat = _from_pairs(getattr(blk, name))
            except ValueError as e:
                raise GSMFormatError(f"ragged matrix: {e}", block=f"blocks[{i}].{name}") from e
            if mat.shape != shape:
                raise GSMFormatError(
                    f"dimension mismatch: got {mat.shape}, expected {shape}", block=f"blocks[{i}].{name}"
                )
            mats[name] = mat
        gsms.append(
            AntennaGSM(frequency, model.lmax, mats["gamma"], mats["r"], mats["t"], mats["s"], bubble)
        )
    logger.info("Loaded %d GSM blocks (lmax=%d, P=%d) from %s", len(gsms), model.lmax, p, path)
    return gsms


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def _same_region(a: HomogeneousRegion, b: HomogeneousRegion) -> bool:
    return np.isclose(a.eps, b.eps, rtol=1e-12, atol=0) and np.isclose(a.mu, b.mu, rtol=1e-12, atol=0)


def _check_pair(antenna: AntennaGSM, sso: SSOSet) -> None:
    if antenna.lmax != sso.lmax:
        raise DomainError(f"antenna lmax {antenna.lmax} differs from SSO lmax {sso.lmax}")
    if abs(antenna.frequency - sso.frequency) > config.FREQUENCY_MATCH_HZ:
        raise DomainError(
            f"antenna frequency {antenna.frequency} Hz differs from SSO frequency {sso.frequency} Hz"
        )
    if not _same_region(antenna.bubble, sso.bubble):
        raise DomainError(
            f"antenna GSM was computed in bubble medium eps={antenna.bubble.eps}, mu={antenna.bubble.mu}; "
            f"shell bubble is eps={sso.bubble.eps}, mu={sso.bubble.mu}"
        )


def multiple_scattering_radius(antenna: AntennaGSM, sso: SSOSet) -> float:
    """Spectral radius of 1/2 (S - 1) rho, the bubble round-trip operator"""
    loop = 0.5 * (antenna.S - np.eye(antenna.num_modes)) * sso.rho[None, :]
    return float(np.max(np.abs(np.linalg.eigvals(loop))))


def compose(antenna: AntennaGSM, sso: SSOSet) -> EffectiveGSM:
    """
    Effective GSM of the antenna inside the shell.

    With M = 1 - 1/2 (S - 1) rho,

        Gamma~ = Gamma + 1/2 R rho M^-1 T
        R~     = R [Phi + rho M^-1 1/2 (S - 1) Phi]
        T~     = Psi M^-1 T
        S~     = 1 + 2t + Psi M^-1 (S - 1) Phi

    M is factorized once; every M^-1 product is an LU solve.

    Raises:
        CompositionError: M singular or with condition estimate above MAX_CONDITION
    """
    _check_pair(antenna, sso)
    n = antenna.num_modes
    s_minus = antenna.S - np.eye(n)
    m = np.eye(n) - 0.5 * s_minus * sso.rho[None, :]

    try:
        lu, piv = lu_factor(m, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise CompositionError(f"cannot factorize M: {e}", antenna.frequency) from e
    gecon = get_lapack_funcs("gecon", (lu,))
    rcond, info = gecon(lu, np.linalg.norm(m, 1), norm="1")
    if info != 0 or rcond == 0 or 1.0 / rcond > config.MAX_CONDITION:
        condition = np.inf if rcond == 0 else 1.0 / rcond
        raise CompositionError(f"M is singular or ill-conditioned (condition ~{condition:.3g})", antenna.frequency)

    m_inv_t = lu_solve((lu, piv), antenna.T)
    m_inv_s_phi = lu_solve((lu, piv), s_minus * sso.phi[None, :])

    gamma = antenna.gamma + 0.5 * antenna.R @ (sso.rho[:, None] * m_inv_t)
    r = antenna.R * sso.phi[None, :] + 0.5 * antenna.R @ (sso.rho[:, None] * m_inv_s_phi)
    t = sso.psi[:, None] * m_inv_t
    s = np.eye(n) + np.diag(2 * sso.t) + sso.psi[:, None] * m_inv_s_phi

    logger.debug("Composed at %.6g GHz: cond(M) ~ %.3g", antenna.frequency / 1e9, 1.0 / rcond)
    return EffectiveGSM(antenna.frequency, antenna.lmax, gamma, r, t, s, sso.exterior)


def compose_sweep(
    antennas: Sequence[AntennaGSM], ssos: Sequence[SSOSet], threads: int = 1
) -> List[EffectiveGSM]:
    """Compose matching frequency points; every SSO must find an antenna GSM within 1 Hz"""
    pairs = []
    for sso in ssos:
        match = [a for a in antennas if abs(a.frequency - sso.frequency) <= config.FREQUENCY_MATCH_HZ]
        if not match:
            raise DomainError(f"no antenna GSM at {sso.frequency} Hz")
        pairs.append((match[0], sso))
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda pair: compose(*pair), pairs))
    return [compose(a, s) for a, s in pairs]


def respond(eff: GSMBlocks, v: np.ndarray, a_f: np.ndarray) -> SystemResponse:
    """
    w = Gamma~ v + 1/2 R~ a^f and f^f = T~ v + 1/2 (S~ - 1) a^f.

    Raises:
        DomainError: v or a^f of the wrong length
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    a_f = np.asarray(a_f, dtype=complex).reshape(-1)
    if v.size != eff.num_ports:
        raise DomainError(f"port vector has {v.size} entries, expected {eff.num_ports}")
    if a_f.size != eff.num_modes:
        raise DomainError(f"incident mode vector has {a_f.size} entries, expected {eff.num_modes}")
    w = eff.gamma @ v + 0.5 * (eff.R @ a_f)
    f_f = eff.T @ v + 0.5 * (eff.S @ a_f - a_f)
    return SystemResponse(w, f_f)
