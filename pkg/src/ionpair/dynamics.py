"""
Two-ion open-system engine.

Each ion carries three states, ordered (lower, upper, leaked); the
composite 9x9 density matrix uses index ``3*i1 + i2``. Population that
decays out of a metastable level lands in the ion's leaked state, which
never acquires coherences.

Every operation exists in a single-state form acting on ``TwoIonState``
and in a batched form acting on ``(..., 9, 9)`` arrays; the former is a
thin wrapper around the latter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atomic import LevelPair, QuadrupoleEnvironment
from .errors import ConfigError
from .noise import ShotNoiseDraw

DIM = 9
LOWER, UPPER, LEAKED = 0, 1, 2
OUTCOMES = ("SS", "SD", "DS", "DD")
PARITY_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


def index(i1: int, i2: int) -> int:
    return 3 * i1 + i2


@dataclass(frozen=True)
class TwoIonState:
    rho: np.ndarray
    pair1: LevelPair
    pair2: LevelPair

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (DIM, DIM):
            raise ConfigError(f"rho must be 9x9, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def pairs(self) -> tuple[LevelPair, LevelPair]:
        return self.pair1, self.pair2

    def replace(self, rho) -> "TwoIonState":
        return TwoIonState(rho, self.pair1, self.pair2)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def check_state(state: TwoIonState, tol_trace=1e-12, tol_herm=1e-12, tol_eig=1e-10):
    """Raise AssertionError unless ``state`` is a valid density matrix."""
    rho = state.rho
    assert abs(np.trace(rho) - 1) <= tol_trace, f"trace {np.trace(rho)}"
    assert np.max(np.abs(rho - rho.conj().T)) <= tol_herm, "not Hermitian"
    assert np.linalg.eigvalsh(rho).min() >= -tol_eig, "not positive"


@dataclass(frozen=True)
class PulseSpec:
    target: int
    area: float = math.pi / 2
    phase: float = 0.0

    def __post_init__(self):
        if self.target not in (1, 2):
            raise ConfigError("pulse target must be 1 or 2")
        if not 0 < self.area <= 2 * math.pi:
            raise ConfigError("pulse area must lie in (0, 2pi]")


# Preparations ---------------------------------------------------------------

@dataclass(frozen=True)
class Bell:
    """(|ge> + e^{i phi}|eg>)/sqrt2, or (|gg> + e^{i phi}|ee>)/sqrt2 if correlated."""

    phi: float = 0.0
    correlated: bool = False


@dataclass(frozen=True)
class Product:
    """Both ions in (|g> + |e>)/sqrt2."""


@dataclass(frozen=True)
class GroundGround:
    """|g g>."""


def _ket(amplitudes: dict) -> np.ndarray:
    psi = np.zeros(DIM, dtype=complex)
    for (i1, i2), a in amplitudes.items():
        psi[index(i1, i2)] = a
    return psi


def prepare(kind, pairs) -> TwoIonState:
    p1, p2 = pairs
    s = 1 / math.sqrt(2)
    if isinstance(kind, Bell):
        ph = np.exp(1j * kind.phi)
        if kind.correlated:
            psi = _ket({(LOWER, LOWER): s, (UPPER, UPPER): s * ph})
        else:
            psi = _ket({(LOWER, UPPER): s, (UPPER, LOWER): s * ph})
    elif isinstance(kind, Product):
        psi = _ket({(a, b): 0.5 for a in (LOWER, UPPER) for b in (LOWER, UPPER)})
    elif isinstance(kind, GroundGround):
        psi = _ket({(LOWER, LOWER): 1.0})
    else:
        raise ConfigError(f"unknown preparation {kind!r}")
    return TwoIonState(np.outer(psi, psi.conj()), p1, p2)


# Free evolution -------------------------------------------------------------

def ion_phases(pair1: LevelPair, pair2: LevelPair, wait: float,
               env: QuadrupoleEnvironment, B0: float,
               b_phase_integral=0.0, laser_freq=0.0):
    """Phases (rad) accumulated by each ion's upper level relative to lower."""
    out = []
    for p in (pair1, pair2):
        # each term wrapped to one cycle before summing: raw phases reach 1e7 rad,
        # and a shared field term must cancel between ions to rounding of O(1)
        cycles = (_wrap(p.detuning(env, B0) * wait)
                  + _wrap(p.zeeman_sensitivity * np.asarray(b_phase_integral, float))
                  - _wrap(float(p.laser_coupled) * np.asarray(laser_freq, float) * wait))
        out.append(2 * np.pi * cycles)
    return out[0], out[1]


def _wrap(cycles):
    return cycles - np.round(cycles)


def phase_vectors(theta1, theta2) -> np.ndarray:
    """Diagonal of the composite phase unitary, shape (..., 9)."""
    theta1, theta2 = np.broadcast_arrays(np.asarray(theta1, float), np.asarray(theta2, float))
    one = np.ones_like(theta1, dtype=complex)
    d1 = np.stack([one, np.exp(-1j * theta1), one], axis=-1)
    d2 = np.stack([one, np.exp(-1j * theta2), one], axis=-1)
    return (d1[..., :, None] * d2[..., None, :]).reshape(*theta1.shape, DIM)


def apply_phases(rho, d) -> np.ndarray:
    d = np.asarray(d)
    return rho * (d[..., :, None] * d[..., None, :].conj())


def _apply_local(rho, kraus, ion: int) -> np.ndarray:
    rho = np.asarray(rho)
    lead = rho.shape[:-2]
    r4 = rho.reshape(*lead, 3, 3, 3, 3)
    out = np.zeros_like(r4)
    for K in kraus:
        if ion == 1:
            out += np.einsum("ai,...ibjd,cj->...abcd", K, r4, K.conj())
        else:
            out += np.einsum("bj,...ijkl,dl->...ibkd", K, r4, K.conj())
    return out.reshape(*lead, DIM, DIM)


def decay_kraus(rate_lower: float, rate_upper: float, wait: float):
    """Kraus operators moving lower/upper population into the leaked state."""
    pl = -math.expm1(-rate_lower * wait)
    pu = -math.expm1(-rate_upper * wait)
    K0 = np.diag([math.sqrt(1 - pl), math.sqrt(1 - pu), 1.0]).astype(complex)
    Kl = np.zeros((3, 3), complex)
    Kl[LEAKED, LOWER] = math.sqrt(pl)
    Ku = np.zeros((3, 3), complex)
    Ku[LEAKED, UPPER] = math.sqrt(pu)
    return [K0, Kl, Ku]


def apply_decay(rho, pair1: LevelPair, pair2: LevelPair, wait: float) -> np.ndarray:
    for ion, p in ((1, pair1), (2, pair2)):
        rl, ru = p.decay_rates
        if (rl or ru) and wait > 0:
            rho = _apply_local(rho, decay_kraus(rl, ru, wait), ion)
    return rho


def evolve(state: TwoIonState, wait: float, draw: ShotNoiseDraw,
           env: QuadrupoleEnvironment, B0: float) -> TwoIonState:
    """Free evolution for ``wait`` seconds under one noise realization.

    The phase unitary is diagonal and commutes with the decay channel, so
    the two are applied one after the other.
    """
    if wait < 0:
        raise ConfigError("wait must be >= 0")
    th1, th2 = ion_phases(state.pair1, state.pair2, wait, env, B0,
                          draw.b_phase_integral, draw.laser_freq)
    rho = apply_phases(state.rho, phase_vectors(th1, th2))
    rho = apply_decay(rho, state.pair1, state.pair2, wait)
    return state.replace(rho)


def _summed_zeeman(pair1: LevelPair, pair2: LevelPair) -> np.ndarray:
    s = np.zeros(DIM)
    for i1 in range(3):
        for i2 in range(3):
            s[index(i1, i2)] = (pair1.zeeman_sensitivity * (i1 == UPPER)
                                + pair2.zeeman_sensitivity * (i2 == UPPER))
    return s


def dephasing_mask(pair1: LevelPair, pair2: LevelPair) -> np.ndarray:
    """1 where a coherence is field-insensitive, 0 where it dephases."""
    s = _summed_zeeman(pair1, pair2)
    scale = max(abs(pair1.zeeman_sensitivity), abs(pair2.zeeman_sensitivity), 1.0)
    return (np.abs(s[:, None] - s[None, :]) <= 1e-9 * scale).astype(float)


def collective_dephase(state: TwoIonState) -> TwoIonState:
    """Remove every coherence that a common field fluctuation would scramble."""
    return state.replace(state.rho * dephasing_mask(state.pair1, state.pair2))


# Pulses and detection -------------------------------------------------------

def pulse_unitary(area, phase) -> np.ndarray:
    """exp(-i area/2 (cos phase sx + sin phase sy)) on {lower, upper}, shape (..., 3, 3)."""
    area, phase = np.broadcast_arrays(np.asarray(area, float), np.asarray(phase, float))
    c = np.cos(area / 2)
    s = np.sin(area / 2)
    U = np.zeros(area.shape + (3, 3), dtype=complex)
    U[..., 0, 0] = c
    U[..., 1, 1] = c
    U[..., 0, 1] = -1j * s * np.exp(-1j * phase)
    U[..., 1, 0] = -1j * s * np.exp(1j * phase)
    U[..., 2, 2] = 1.0
    return U


def apply_pulse(state: TwoIonState, pulse: PulseSpec) -> TwoIonState:
    U = pulse_unitary(pulse.area, pulse.phase)
    return state.replace(_apply_local(state.rho, [U], pulse.target))


def rotated_populations(rho, U1, U2) -> np.ndarray:
    """Diagonal of (U1 x U2) rho (U1 x U2)^dagger as (..., 3, 3)."""
    lead = np.asarray(rho).shape[:-2]
    r4 = np.asarray(rho).reshape(*lead, 3, 3, 3, 3)
    p = np.einsum("...ai,...bj,...ijkl,...ak,...bl->...ab", U1, U2, r4,
                  U1.conj(), U2.conj(), optimize=True)
    return p.real


def outcome_probs(populations, leak_as: str = "S") -> np.ndarray:
    """Fold (..., 3, 3) level populations into (..., 4) over SS, SD, DS, DD.

    Lower levels read out bright (S), upper levels dark (D); leaked
    population reads as ``leak_as``.
    """
    if leak_as not in ("S", "D"):
        raise ConfigError("leak_as must be 'S' or 'D'")
    bright = [LOWER, LEAKED] if leak_as == "S" else [LOWER]
    dark = [UPPER] if leak_as == "S" else [UPPER, LEAKED]
    P = np.asarray(populations)
    groups = (bright, dark)
    out = np.empty(P.shape[:-2] + (4,))
    for k, (a, b) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        out[..., k] = P[..., groups[a], :][..., :, groups[b]].sum(axis=(-2, -1))
    return out


def measure_probs(state: TwoIonState, leak_as: str = "S") -> np.ndarray:
    pops = np.real(np.diag(state.rho)).reshape(3, 3)
    p = np.clip(outcome_probs(pops, leak_as), 0.0, None)
    return p / p.sum()


def parity(probs) -> np.ndarray:
    return np.asarray(probs) @ PARITY_SIGNS


def single_ion_z(probs):
    """<sigma_z> of ion 1 and ion 2 with S counted as +1."""
    p = np.asarray(probs)
    z1 = p[..., 0] + p[..., 1] - p[..., 2] - p[..., 3]
    z2 = p[..., 0] - p[..., 1] + p[..., 2] - p[..., 3]
    return z1, z2


# Imperfect preparation ------------------------------------------------------

_PAULIS = [np.diag([1, 1, 1]).astype(complex),
           np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], complex),
           np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 1]], complex),
           np.diag([1, -1, 1]).astype(complex)]


def depolarizing_kraus(fidelity: float):
    """Pauli twirl on {lower, upper} that scales the Bloch vector by ``fidelity``."""
    if not 0 <= fidelity <= 1:
        raise ConfigError("fidelity must lie in [0, 1]")
    w = [(1 + 3 * fidelity) / 4] + [(1 - fidelity) / 4] * 3
    return [math.sqrt(wk) * P for wk, P in zip(w, _PAULIS) if wk > 0]


def depolarize(state: TwoIonState, ion: int, fidelity: float) -> TwoIonState:
    if fidelity == 1:
        return state
    return state.replace(_apply_local(state.rho, depolarizing_kraus(fidelity), ion))
