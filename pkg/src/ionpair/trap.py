"""Linear-trap geometry: two-ion spacing and field-gradient calibration."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants

from .errors import ConfigError

#: Nominal mass of 40Ca+ in atomic mass units.
CA40_MASS_AMU = 40.0

# Tip voltage (V) -> axial frequency (Hz) endpoints of the trap.
TIP_VOLTAGE_TABLE = ((500.0, 860e3), (2000.0, 1720e3))


@dataclass(frozen=True)
class TrapConfig:
    axial_freq: float
    radial_freq: float = 4e6
    ion_mass: float = CA40_MASS_AMU

    def __post_init__(self):
        if not (self.axial_freq > 0 and math.isfinite(self.axial_freq)):
            raise ConfigError(f"axial_freq must be > 0, got {self.axial_freq}")
        if not self.radial_freq > self.axial_freq:
            raise ConfigError("radial_freq must exceed axial_freq")
        if not self.ion_mass > 0:
            raise ConfigError("ion_mass must be > 0")

    @property
    def mass_kg(self) -> float:
        return self.ion_mass * constants.atomic_mass


def two_ion_distance(cfg: TrapConfig) -> float:
    """Equilibrium separation of two singly charged ions, m."""
    omega = 2 * math.pi * cfg.axial_freq
    return (constants.e ** 2
            / (2 * math.pi * constants.epsilon_0 * cfg.mass_kg * omega ** 2)) ** (1 / 3)


def gradient_from_axial_freq(cfg: TrapConfig) -> float:
    """Axial field gradient m*omega_z^2/e, in V/mm^2."""
    omega = 2 * math.pi * cfg.axial_freq
    return cfg.mass_kg * omega ** 2 / constants.e * 1e-6


def axial_freq_from_tip_voltage(voltage: float) -> float:
    """Axial frequency for a tip voltage, interpolated linearly in sqrt(V).

    Only the two endpoints of the trap are known, which happen to lie on
    f proportional to sqrt(V); values outside 500-2000 V are extrapolated.
    """
    (v0, f0), (v1, f1) = TIP_VOLTAGE_TABLE
    if voltage < 0:
        raise ConfigError("tip voltage must be >= 0")
    s0, s1 = math.sqrt(v0), math.sqrt(v1)
    return f0 + (f1 - f0) * (math.sqrt(voltage) - s0) / (s1 - s0)
