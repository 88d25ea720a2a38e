"""
Ramsey / parity sequencer.

A plan is run point by point: every shot draws its own noise, the prepared
state is evolved, both ions receive an analysis pulse and one of the four
outcomes SS, SD, DS, DD is sampled. Parity is +1 for SS and DD and -1
otherwise.

Analysis phases are referenced to the preparation frame: the equal
superpositions (|g> + |e>)/sqrt2 correspond to a pi/2 pulse about +y, so an
analysis phase phi is applied as a rotation about the axis at angle
phi + pi/2. With this choice a single ion reads
<sigma_z> = -cos(theta + phi) and the parity of two unentangled ions is
cos(theta1 + phi1) cos(theta2 + phi2).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from .atomic import LevelPair, QuadrupoleEnvironment, gradient_pair
from .errors import ConfigError
from .noise import LANE_MEASURE, NoiseModel, draw_shots, ou_integral_variance, shot_uniforms

ANALYSIS_FRAME = math.pi / 2
CHUNK = 4096


@dataclass(frozen=True)
class DephasedProduct:
    """Product state passed through the collective dephasing channel."""


Bell = dyn.Bell
Product = dyn.Product


@dataclass(frozen=True)
class WaitScan:
    waits: tuple

    def __post_init__(self):
        object.__setattr__(self, "waits", tuple(float(w) for w in self.waits))


@dataclass(frozen=True)
class PhaseScan:
    phases: tuple
    wait: float

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))


@dataclass(frozen=True)
class Fixed:
    phi1: float = 0.0
    phi2: float = 0.0


@dataclass(frozen=True)
class RandomizedLaserSensitive:
    """phi1 = phi0 + phi_X, phi2 = -phi_X."""

    phi0: float = 0.0


@dataclass(frozen=True)
class RandomizedBFieldSensitive:
    """phi1 = phi0 + phi_X, phi2 = +phi_X."""

    phi0: float = 0.0


@dataclass(frozen=True)
class RamseyPlan:
    preparation: object
    pairs: tuple
    scan: object
    phase_policy: object = field(default_factory=Fixed)
    shots_per_point: int = 100
    noise: NoiseModel = field(default_factory=NoiseModel)
    env: QuadrupoleEnvironment = field(default_factory=QuadrupoleEnvironment)
    B0: float = 0.0
    leak_as: str = "S"
    prep_fidelity: tuple = (1.0, 1.0)

    def __post_init__(self):
        if not isinstance(self.preparation, (Bell, Product, DephasedProduct)):
            raise ConfigError(f"unsupported preparation {self.preparation!r}")
        if len(self.pairs) != 2 or not all(isinstance(p, LevelPair) for p in self.pairs):
            raise ConfigError("pairs must be two LevelPair objects")
        if int(self.shots_per_point) < 1 or int(self.shots_per_point) >= 2 ** 32:
            raise ConfigError("shots_per_point must lie in [1, 2**32)")
        if isinstance(self.scan, WaitScan):
            if not self.scan.waits:
                raise ConfigError("wait grid is empty")
            if min(self.scan.waits) < 0:
                raise ConfigError("wait values must be >= 0")
        elif isinstance(self.scan, PhaseScan):
            if not self.scan.phases:
                raise ConfigError("phase grid is empty")
            if self.scan.wait < 0:
                raise ConfigError("wait must be >= 0")
        else:
            raise ConfigError(f"unsupported scan {self.scan!r}")
        if isinstance(self.phase_policy, RandomizedLaserSensitive):
            if not any(p.laser_coupled for p in self.pairs):
                raise ConfigError("laser-sensitive policy needs a laser-coupled pair")
        elif not isinstance(self.phase_policy, (Fixed, RandomizedBFieldSensitive)):
            raise ConfigError(f"unsupported phase policy {self.phase_policy!r}")
        if self.leak_as not in ("S", "D"):
            raise ConfigError("leak_as must be 'S' or 'D'")
        if any(not 0 <= f <= 1 for f in self.prep_fidelity):
            raise ConfigError("prep_fidelity entries must lie in [0, 1]")

    def points(self) -> list[tuple[float, float]]:
        """(wait, scan phase) of every scan point."""
        if isinstance(self.scan, WaitScan):
            return [(w, 0.0) for w in self.scan.waits]
        return [(self.scan.wait, p) for p in self.scan.phases]

    def prepared_state(self) -> dyn.TwoIonState:
        kind = Product() if isinstance(self.preparation, DephasedProduct) else self.preparation
        state = dyn.prepare(kind, self.pairs)
        for ion, f in ((1, self.prep_fidelity[0]), (2, self.prep_fidelity[1])):
            state = dyn.depolarize(state, ion, f)
        if isinstance(self.preparation, DephasedProduct):
            state = dyn.collective_dephase(state)
        return state


@dataclass(frozen=True)
class ParityTrace:
    """Estimates at one scan point."""

    abscissa: float
    parity_mean: float
    parity_stderr: float
    single_ion_means: tuple
    shots: int
    wait: float = 0.0
    phase: float = 0.0


def _policy_coefficients(policy, scan_phase: float):
    """Analysis phases as (a1, b1), (a2, b2) with phi_n = a_n + b_n * phi_X."""
    if isinstance(policy, Fixed):
        return (policy.phi1 + scan_phase, 0), (policy.phi2, 0)
    phi0 = policy.phi0 + scan_phase
    if isinstance(policy, RandomizedLaserSensitive):
        return (phi0, 1), (0.0, -1)
    return (phi0, 1), (0.0, 1)


def analysis_phases(policy, scan_phase: float, phi_x):
    (a1, b1), (a2, b2) = _policy_coefficients(policy, scan_phase)
    phi_x = np.asarray(phi_x, float)
    return a1 + b1 * phi_x, a2 + b2 * phi_x


def _shot_chunk(plan: RamseyPlan, rho_w, wait: float, scan_phase: float, idx):
    draws = draw_shots(plan.noise, wait, idx)
    th1, th2 = dyn.ion_phases(*plan.pairs, wait, plan.env, plan.B0,
                              draws.b_phase_integral, draws.laser_freq)
    rho = dyn.apply_phases(rho_w, dyn.phase_vectors(th1, th2))
    phi1, phi2 = analysis_phases(plan.phase_policy, scan_phase, draws.phi_x)
    U1 = dyn.pulse_unitary(math.pi / 2, phi1 + ANALYSIS_FRAME)
    U2 = dyn.pulse_unitary(math.pi / 2, phi2 + ANALYSIS_FRAME)
    probs = dyn.outcome_probs(dyn.rotated_populations(rho, U1, U2), plan.leak_as)
    probs = np.clip(probs, 0.0, None)
    cum = np.cumsum(probs, axis=-1)
    cum /= cum[:, -1:]
    u = shot_uniforms(plan.noise.master_seed, idx, LANE_MEASURE)
    outcome = (u[:, None] >= cum[:, :3]).sum(axis=1)
    sign1 = np.where(outcome < 2, 1.0, -1.0)
    sign2 = np.where(outcome % 2 == 0, 1.0, -1.0)
    return sign1 * sign2, sign1, sign2


def point_outcomes(plan: RamseyPlan, point_index: int, workers: int = 1):
    """Per-shot parity and single-ion readouts (+1 bright) at one scan point."""
    wait, scan_phase = plan.points()[point_index]
    rho_w = dyn.apply_decay(plan.prepared_state().rho, *plan.pairs, wait)
    n = int(plan.shots_per_point)
    base = np.uint64(point_index) << np.uint64(32)
    chunks = [np.arange(s, min(s + CHUNK, n), dtype=np.uint64) | base
              for s in range(0, n, CHUNK)]

    def work(idx):
        return _shot_chunk(plan, rho_w, wait, scan_phase, idx)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(3))


def _stderr(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def run_plan(plan: RamseyPlan, workers: int = 1) -> list[ParityTrace]:
    """Monte-Carlo estimate of parity and single-ion means at every scan point.

    Output depends only on the plan (including its noise seed); ``workers``
    changes the thread count, not the numbers.
    """
    out = []
    wait_scan = isinstance(plan.scan, WaitScan)
    points = plan.points()
    if workers > 1 and len(points) > 1:
        # points in parallel, chunks within a point serially; map keeps order
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: point_outcomes(plan, k), range(len(points))))
    else:
        results = [point_outcomes(plan, k, workers) for k in range(len(points))]
    for (wait, phase), (par, z1, z2) in zip(points, results):
        out.append(ParityTrace(
            abscissa=wait if wait_scan else phase,
            parity_mean=float(par.mean()),
            parity_stderr=_stderr(par),
            single_ion_means=(float(z1.mean()), float(z2.mean())),
            shots=len(par), wait=wait, phase=phase))
    return out


def trace_arrays(traces):
    """Columns (abscissa, parity, stderr, ion1, ion2) of a list of traces."""
    t = np.array([p.abscissa for p in traces])
    y = np.array([p.parity_mean for p in traces])
    e = np.array([p.parity_stderr for p in traces])
    z = np.array([p.single_ion_means for p in traces]).reshape(-1, 2)
    return t, y, e, z[:, 0], z[:, 1]


# Closed-form noise-averaged signals -----------------------------------------

def _mean_cos(plan: RamseyPlan, wait: float, c1: int, c2: int, const: float) -> float:
    """<cos(c1 theta1 + c2 theta2 + const)> over Gaussian field and laser noise."""
    p1, p2 = plan.pairs
    nu1 = p1.detuning(plan.env, plan.B0) - p1.laser_coupled * plan.noise.laser_offset
    nu2 = p2.detuning(plan.env, plan.B0) - p2.laser_coupled * plan.noise.laser_offset
    mean = 2 * math.pi * (c1 * nu1 + c2 * nu2) * wait + const
    s = c1 * p1.zeeman_sensitivity + c2 * p2.zeeman_sensitivity
    lc = c1 * float(p1.laser_coupled) + c2 * float(p2.laser_coupled)
    var_i = float(ou_integral_variance(plan.noise.b_rms, plan.noise.b_corr_time, wait))
    var = (2 * math.pi) ** 2 * (s * s * var_i + (lc * plan.noise.laser_sigma * wait) ** 2)
    return math.cos(mean) * math.exp(-var / 2)


def expected_parity(plan: RamseyPlan, wait: float, phase: float = 0.0) -> float:
    """Noise-averaged parity at one (wait, scan phase) point.

    Uses the trigonometric expansion of the parity signal rather than the
    density-matrix engine. Terms that still depend on the random protocol
    phase average to zero exactly; terms that a common field fluctuation
    scrambles are dropped for the dephased product preparation.
    """
    p1, p2 = plan.pairs
    (a1, b1), (a2, b2) = _policy_coefficients(plan.phase_policy, phase)
    lam = 1.0 if plan.leak_as == "S" else -1.0
    f1, f2 = plan.prep_fidelity
    (gl1, gu1), (gl2, gu2) = p1.decay_rates, p2.decay_rates
    el1, eu1 = math.exp(-gl1 * wait), math.exp(-gu1 * wait)
    el2, eu2 = math.exp(-gl2 * wait), math.exp(-gu2 * wait)
    c1 = math.sqrt(el1 * eu1)
    c2 = math.sqrt(el2 * eu2)
    mask = None
    if isinstance(plan.preparation, DephasedProduct):
        scale = max(abs(p1.zeeman_sensitivity), abs(p2.zeeman_sensitivity), 1.0)
        mask = scale  # dephased preparation: drop field-sensitive terms

    def term(k1, k2, const=0.0):
        if k1 * b1 + k2 * b2 != 0:
            return 0.0
        if mask is not None:
            s = k1 * p1.zeeman_sensitivity + k2 * p2.zeeman_sensitivity
            if abs(s) > 1e-9 * mask:
                return 0.0
        return _mean_cos(plan, wait, k1, k2, k1 * a1 + k2 * a2 + const)

    prep = plan.preparation
    if isinstance(prep, Bell):
        k = f1 * f2 * c1 * c2
        if prep.correlated:
            both_leaked = 0.5 * ((1 - el1) * (1 - el2) + (1 - eu1) * (1 - eu2))
            return both_leaked + k * term(1, 1, -prep.phi)
        both_leaked = 0.5 * ((1 - el1) * (1 - eu2) + (1 - eu1) * (1 - el2))
        return both_leaked + k * term(-1, 1, prep.phi)

    l1 = 1 - 0.5 * (el1 + eu1)
    l2 = 1 - 0.5 * (el2 + eu2)
    k1, k2 = f1 * c1, f2 * c2
    return (l1 * l2
            - lam * l1 * k2 * term(0, 1)
            - lam * l2 * k1 * term(1, 0)
            + 0.5 * k1 * k2 * (term(1, 1) + term(1, -1)))


def expected_single_ion(plan: RamseyPlan, wait: float, phase: float = 0.0):
    """Noise-averaged <sigma_z> of each ion (bright = +1) for product preparations."""
    if isinstance(plan.preparation, Bell):
        raise ConfigError("single-ion signals of a Bell state carry no phase")
    p1, p2 = plan.pairs
    (a1, b1), (a2, b2) = _policy_coefficients(plan.phase_policy, phase)
    lam = 1.0 if plan.leak_as == "S" else -1.0
    out = []
    for n, (p, a, b, f) in enumerate(((p1, a1, b1, plan.prep_fidelity[0]),
                                      (p2, a2, b2, plan.prep_fidelity[1]))):
        gl, gu = p.decay_rates
        el, eu = math.exp(-gl * wait), math.exp(-gu * wait)
        leak = 1 - 0.5 * (el + eu)
        dephased = isinstance(plan.preparation, DephasedProduct) and p.zeeman_sensitivity != 0
        if b != 0 or dephased:
            coh = 0.0
        else:
            k = (1, 0) if n == 0 else (0, 1)
            coh = f * math.sqrt(el * eu) * _mean_cos(plan, wait, *k, a)
        out.append(lam * leak - coh)
    return tuple(out)


# Magnetic-gradient measurement ---------------------------------------------

@dataclass(frozen=True)
class GradientResult:
    traces: list
    fit: object
    analytic_freq: float
    delta_B: float


def gradient_plan(dB_per_dz: float, distance: float, waits, shots_per_point: int = 100,
                  noise: NoiseModel | None = None, pair: LevelPair | None = None,
                  B0: float = 0.0) -> RamseyPlan:
    """Both ions on the same transition, sitting at B0 -/+ dB/2."""
    pair = pair or gradient_pair()
    delta_B = dB_per_dz * distance
    half = 0.5 * pair.zeeman_sensitivity * delta_B
    p1 = LevelPair(pair.lower, pair.upper, pair.zeeman_sensitivity,
                   pair.quadrupole_sensitivity, pair.laser_coupled,
                   pair.static_detuning + half)
    p2 = LevelPair(pair.lower, pair.upper, pair.zeeman_sensitivity,
                   pair.quadrupole_sensitivity, pair.laser_coupled,
                   pair.static_detuning - half)
    return RamseyPlan(DephasedProduct(), (p1, p2), WaitScan(tuple(waits)), Fixed(),
                      shots_per_point, noise or NoiseModel(), QuadrupoleEnvironment(), B0)


def gradient_frequency(dB_per_dz: float, distance: float,
                       pair: LevelPair | None = None) -> float:
    """Parity frequency produced by a field gradient across the ion pair, Hz."""
    pair = pair or gradient_pair()
    return abs(pair.zeeman_sensitivity * dB_per_dz * distance)


def gradient_scenario(dB_per_dz: float, distance: float, waits,
                      shots_per_point: int = 100, noise: NoiseModel | None = None,
                      pair: LevelPair | None = None, workers: int = 1) -> GradientResult:
    """Run the gradient plan and fit the parity frequency.

    The fit floats a constant offset because population decaying out of
    D5/2 reads as bright on both ions over the ~1 s scans needed here.
    """
    from .analysis import fit_damped_sinusoid

    plan = gradient_plan(dB_per_dz, distance, waits, shots_per_point, noise, pair)
    traces = run_plan(plan, workers)
    fit = fit_damped_sinusoid(traces, offset=True)
    return GradientResult(traces, fit, gradient_frequency(dB_per_dz, distance, pair),
                          dB_per_dz * distance)
