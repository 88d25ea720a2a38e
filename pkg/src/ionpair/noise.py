"""
Seeded collective-noise generators.

Every random number is a pure function of ``(master_seed, shot_index, lane)``
through a counter-based SplitMix64 construction, so shots can be evaluated
in any order or in parallel and still reproduce bit for bit:

    key    = fmix(master_seed + GAMMA)
    child  = fmix(key + shot_index * GAMMA)          # per-shot substream
    u[k]   = fmix(child + (k + 1) * GAMMA)           # k-th draw of the shot

``fmix`` is the SplitMix64 output finalizer and GAMMA = 0x9E3779B97F4A7C15.
A 64-bit word maps to a double in [0, 1) through its top 53 bits.

Lanes 0 and 1 feed a Box-Muller pair (magnetic integral, laser frequency),
lane 2 is the protocol phase, lane 3 is reserved for measurement sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import ConfigError, ZeroNoise

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

LANE_B, LANE_LASER, LANE_PHI, LANE_MEASURE = 0, 1, 2, 3


def _fmix(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def shot_words(master_seed: int, shot_index, lane: int) -> np.ndarray:
    """Raw 64-bit words for ``lane`` of each shot in ``shot_index``."""
    seed = np.uint64(int(master_seed) & 0xFFFFFFFFFFFFFFFF)
    idx = np.asarray(shot_index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _fmix(seed + GAMMA)
        child = _fmix(key + idx * GAMMA)
        return _fmix(child + np.uint64(lane + 1) * GAMMA)


def shot_uniforms(master_seed: int, shot_index, lane: int) -> np.ndarray:
    """Uniform doubles in [0, 1)."""
    w = shot_words(master_seed, shot_index, lane)
    return (w >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def shot_normals(master_seed: int, shot_index) -> tuple[np.ndarray, np.ndarray]:
    """Two independent standard normals per shot (Box-Muller on lanes 0, 1)."""
    u1 = 1.0 - shot_uniforms(master_seed, shot_index, LANE_B)  # (0, 1]
    u2 = shot_uniforms(master_seed, shot_index, LANE_LASER)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)


@dataclass(frozen=True)
class NoiseModel:
    b_rms: float = 0.0        # G
    b_corr_time: float = 0.1  # s
    laser_fwhm: float = 0.0   # Hz
    laser_offset: float = 0.0  # Hz
    master_seed: int = 1

    def __post_init__(self):
        if not self.b_rms >= 0:
            raise ConfigError("b_rms must be >= 0")
        if not self.b_corr_time > 0:
            raise ConfigError("b_corr_time must be > 0")
        if not self.laser_fwhm >= 0:
            raise ConfigError("laser_fwhm must be >= 0")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ConfigError("master_seed must fit in 64 bits")

    @property
    def laser_sigma(self) -> float:
        return self.laser_fwhm / FWHM_PER_SIGMA

    def with_seed(self, seed: int) -> "NoiseModel":
        return NoiseModel(self.b_rms, self.b_corr_time, self.laser_fwhm,
                          self.laser_offset, seed)


@dataclass(frozen=True)
class ShotNoiseDraw:
    b_phase_integral: float  # G s
    laser_freq: float        # Hz
    phi_x: float             # rad


@dataclass(frozen=True)
class ShotNoiseBatch:
    """Array-valued counterpart of ShotNoiseDraw, one entry per shot."""

    b_phase_integral: np.ndarray
    laser_freq: np.ndarray
    phi_x: np.ndarray

    def __len__(self):
        return len(self.phi_x)

    def __getitem__(self, i) -> ShotNoiseDraw:
        return ShotNoiseDraw(float(self.b_phase_integral[i]),
                             float(self.laser_freq[i]), float(self.phi_x[i]))


def ou_integral_variance(b_rms: float, corr_time: float, wait) -> np.ndarray:
    """Variance of the integral of a stationary OU process over [0, wait]."""
    t = np.asarray(wait, dtype=float)
    x = t / corr_time
    # x - 1 + exp(-x), with a series where the closed form cancels
    g = np.where(x < 1e-4, x * x / 2 - x ** 3 / 6 + x ** 4 / 24, x + np.expm1(-x))
    return 2.0 * b_rms ** 2 * corr_time ** 2 * g


def draw_shots(model: NoiseModel, wait: float, shot_index) -> ShotNoiseBatch:
    """Noise draws for a batch of shots.

    The magnetic phase integral is sampled exactly: the time integral of a
    stationary Gaussian OU process is Gaussian with variance
    ``ou_integral_variance``. The laser error is quasi-static over a shot.
    """
    if wait < 0:
        raise ConfigError("wait must be >= 0")
    idx = np.atleast_1d(np.asarray(shot_index, dtype=np.uint64))
    z_b, z_l = shot_normals(model.master_seed, idx)
    sd_b = math.sqrt(float(ou_integral_variance(model.b_rms, model.b_corr_time, wait)))
    phi = 2 * np.pi * shot_uniforms(model.master_seed, idx, LANE_PHI)
    return ShotNoiseBatch(sd_b * z_b, model.laser_offset + model.laser_sigma * z_l, phi)


def draw_shot(model: NoiseModel, wait: float, shot_index: int) -> ShotNoiseDraw:
    return draw_shots(model, wait, [shot_index])[0]


def quasi_static_dephasing_time(b_rms: float, zeeman_sensitivity: float) -> float:
    """1/e coherence time when the field is frozen over a shot."""
    return math.sqrt(2.0) / (2 * math.pi * abs(zeeman_sensitivity) * b_rms)


def single_ion_dephasing_time(model: NoiseModel, zeeman_sensitivity: float) -> float:
    """1/e decay time of a single-ion coherence under the magnetic OU noise.

    Solves exp(-(2 pi s)^2 Var[I(t)] / 2) = 1/e for t. Returns ``math.inf``
    for an insensitive coherence.
    """
    if model.b_rms == 0:
        raise ZeroNoise("b_rms is zero; coherence never dephases")
    if zeeman_sensitivity == 0:
        return math.inf
    target = 2.0 / (2 * math.pi * zeeman_sensitivity) ** 2

    def f(t):
        return float(ou_integral_variance(model.b_rms, model.b_corr_time, t)) - target

    hi = quasi_static_dephasing_time(model.b_rms, zeeman_sensitivity)
    while f(hi) < 0:
        hi *= 2
    return optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-13)
