"""
Atomic structure of the 40Ca+ S1/2 and D5/2 manifolds.

Linear Zeeman shifts and electric-quadrupole shifts of individual
sublevels, and the per-ion coherence sensitivities built from them.

Units
-----
Frequencies in Hz, magnetic fields in gauss, field gradients in V/mm^2.
The quadrupole moment is carried as ``theta_moment`` in Hz per (V/mm^2),
i.e. already divided by Planck's constant.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy import constants

from .errors import ConfigError, IdenticalLevels

#: Bohr magneton over h, Hz/G.
MU_B_HZ_PER_G = 1.399625e6
G_S = 2.0023
G_D = 1.2
#: Lifetime of the metastable D5/2 level, s.
TAU_D52 = 1.16
MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))


class Term(enum.Enum):
    S_half = "S1/2"
    D_fivehalf = "D5/2"

    @property
    def j(self) -> float:
        return 0.5 if self is Term.S_half else 2.5

    @property
    def g_factor(self) -> float:
        return G_S if self is Term.S_half else G_D


@dataclass(frozen=True)
class Sublevel:
    term: Term
    m: float
    decay_rate: float = field(default=None)  # 1/s; None -> term default

    def __post_init__(self):
        if isinstance(self.term, str):
            object.__setattr__(self, "term", _parse_term(self.term))
        m2 = 2.0 * self.m
        if abs(m2 - round(m2)) > 1e-12 or round(m2) % 2 == 0:
            raise ConfigError(f"m={self.m} is not half-integer")
        if abs(self.m) > self.term.j:
            raise ConfigError(f"|m|={abs(self.m)} exceeds j={self.term.j}")
        if self.decay_rate is None:
            rate = 0.0 if self.term is Term.S_half else 1.0 / TAU_D52
            object.__setattr__(self, "decay_rate", rate)
        if not self.decay_rate >= 0:
            raise ConfigError("decay_rate must be >= 0")

    @property
    def j(self) -> float:
        return self.term.j

    @property
    def g_factor(self) -> float:
        return self.term.g_factor


def _parse_term(name: str) -> Term:
    key = name.strip().upper().replace("_", "").replace("/", "")
    if key in ("S", "S12", "SHALF"):
        return Term.S_half
    if key in ("D", "D52", "DFIVEHALF"):
        return Term.D_fivehalf
    raise ConfigError(f"unknown term {name!r}")


def S(m: float) -> Sublevel:
    """Ground-state sublevel |S1/2, m>."""
    return Sublevel(Term.S_half, m)


def D(m: float, lifetime: float = TAU_D52) -> Sublevel:
    """Metastable sublevel |D5/2, m> with the given lifetime in seconds."""
    rate = 0.0 if math.isinf(lifetime) else 1.0 / lifetime
    return Sublevel(Term.D_fivehalf, m, rate)


@dataclass(frozen=True)
class QuadrupoleEnvironment:
    """Axially symmetric quadrupole field seen by the ions.

    ``beta`` is folded into [0, pi/2]; the angular factor
    3cos^2(beta) - 1 is unchanged by the folding.
    """

    field_gradient: float = 0.0
    beta: float = 0.0
    theta_moment: float = 0.0

    def __post_init__(self):
        b = math.fmod(abs(self.beta), math.pi)
        if b > math.pi / 2:
            b = math.pi - b
        object.__setattr__(self, "beta", b)

    @property
    def angular_factor(self) -> float:
        return 3.0 * math.cos(self.beta) ** 2 - 1.0

    def with_gradient(self, gradient: float) -> "QuadrupoleEnvironment":
        return QuadrupoleEnvironment(gradient, self.beta, self.theta_moment)


@dataclass(frozen=True)
class LevelPair:
    """The two sublevels one ion uses, with derived sensitivities.

    ``quadrupole_sensitivity`` is the coherence shift per unit gradient at
    the beta and theta_moment the pair was built with.
    """

    lower: Sublevel
    upper: Sublevel
    zeeman_sensitivity: float
    quadrupole_sensitivity: float
    laser_coupled: bool = False
    static_detuning: float = 0.0

    def detuning(self, env: QuadrupoleEnvironment, B: float) -> float:
        """Coherence frequency (upper minus lower) in Hz at field ``B``."""
        quad = quadrupole_shift(self.upper, env) - quadrupole_shift(self.lower, env)
        return self.static_detuning + self.zeeman_sensitivity * B + quad

    @property
    def decay_rates(self) -> tuple[float, float]:
        return self.lower.decay_rate, self.upper.decay_rate


def zeeman_shift(level: Sublevel, B: float) -> float:
    """Linear Zeeman shift of ``level`` in a field of ``B`` gauss, Hz."""
    return level.g_factor * level.m * MU_B_HZ_PER_G * B


def quadrupole_angular_factor(level: Sublevel) -> float:
    j, m = level.j, level.m
    return (j * (j + 1) - 3.0 * m * m) / (j * (2 * j - 1))


def quadrupole_shift(level: Sublevel, env: QuadrupoleEnvironment) -> float:
    """Electric quadrupole shift of a D5/2 sublevel in Hz; zero for S1/2."""
    if level.term is not Term.D_fivehalf:
        return 0.0
    return (0.25 * env.field_gradient * env.theta_moment
            * quadrupole_angular_factor(level) * env.angular_factor)


def coherence_sensitivities(pair_spec, env: QuadrupoleEnvironment,
                            laser_coupled: bool = False,
                            static_detuning: float = 0.0) -> LevelPair:
    """Build a LevelPair from ``(lower, upper)``.

    Sensitivities are upper-minus-lower: Hz/G for the Zeeman part and
    Hz per (V/mm^2) for the quadrupole part.
    """
    lower, upper = pair_spec
    if lower == upper:
        raise IdenticalLevels(f"both levels are {lower}")
    if upper.g_factor == lower.g_factor:
        # m differences are exact in binary, keeps DFS cancellations exact
        zs = upper.g_factor * (upper.m - lower.m) * MU_B_HZ_PER_G
    else:
        zs = zeeman_shift(upper, 1.0) - zeeman_shift(lower, 1.0)
    unit = env.with_gradient(1.0)
    qs = quadrupole_shift(upper, unit) - quadrupole_shift(lower, unit)
    return LevelPair(lower, upper, zs, qs, bool(laser_coupled), float(static_detuning))


def theta_for_alpha(alpha: float, pairs, beta: float = 0.0,
                    combination: int = -1) -> float:
    """Quadrupole moment (Hz per V/mm^2) giving a parity slope ``alpha``.

    ``combination`` is -1 when the parity frequency is the difference of
    the two ion detunings and +1 when it is their sum.
    """
    p1, p2 = pairs
    f1 = quadrupole_angular_factor(p1.upper) * (p1.upper.term is Term.D_fivehalf) \
        - quadrupole_angular_factor(p1.lower) * (p1.lower.term is Term.D_fivehalf)
    f2 = quadrupole_angular_factor(p2.upper) * (p2.upper.term is Term.D_fivehalf) \
        - quadrupole_angular_factor(p2.lower) * (p2.lower.term is Term.D_fivehalf)
    ang = 3.0 * math.cos(beta) ** 2 - 1.0
    per_theta = abs(0.25 * ang * (f1 + combination * f2))
    if per_theta < 1e-12:  # magic angle leaves ~1e-16 of rounding
        raise ConfigError("level choice or beta gives no quadrupole sensitivity")
    return alpha / per_theta


def theta_to_ea0sq(theta_moment: float) -> float:
    """Convert Hz per (V/mm^2) to a quadrupole moment in units of e*a0^2."""
    si = theta_moment * constants.h / 1e6  # C m^2
    return si / (constants.e * constants.physical_constants["Bohr radius"][0] ** 2)


# Level choices used in the experiments -------------------------------------

def quadrupole_pairs(env: QuadrupoleEnvironment, tau_d: float = TAU_D52,
                     offset: float = 0.0):
    """Ion pairs for the D5/2 quadrupole measurements.

    Ion 1 uses {m=-5/2 (lower), m=-1/2 (upper)}, ion 2 uses
    {m=-1/2 (lower), m=+3/2 (upper)}. Both coherences then have the same
    Zeeman sensitivity, so the Bell state |ge> + |eg> built from them is
    |-5/2,+3/2> + |-1/2,-1/2> and the product state of the same levels
    dephases into a mixture whose surviving coherence is field-insensitive.
    ``offset`` (Hz) is a constant second-order Zeeman shift of the parity
    frequency, applied to ion 1.
    """
    p1 = coherence_sensitivities((D(-2.5, tau_d), D(-0.5, tau_d)), env,
                                 static_detuning=offset)
    p2 = coherence_sensitivities((D(-0.5, tau_d), D(1.5, tau_d)), env)
    return p1, p2


def linewidth_pairs(env: QuadrupoleEnvironment | None = None, tau_d: float = TAU_D52):
    """S1/2 -> D5/2 pairs with equal laser and opposite field sensitivity."""
    env = env or QuadrupoleEnvironment()
    p1 = coherence_sensitivities((S(-0.5), D(-0.5, tau_d)), env, laser_coupled=True)
    p2 = coherence_sensitivities((S(0.5), D(0.5, tau_d)), env, laser_coupled=True)
    return p1, p2


def gradient_pair(env: QuadrupoleEnvironment | None = None, tau_d: float = TAU_D52,
                  static_detuning: float = 0.0) -> LevelPair:
    """The |S1/2,+1/2> -> |D5/2,+5/2> transition (2.8 MHz/G)."""
    env = env or QuadrupoleEnvironment()
    return coherence_sensitivities((S(0.5), D(2.5, tau_d)), env, laser_coupled=True,
                                   static_detuning=static_detuning)
