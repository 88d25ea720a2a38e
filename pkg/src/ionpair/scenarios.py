"""
Declarative scenarios and the plan builders behind them.

A scenario is a TOML file with a fixed set of tables and keys; unknown keys
are rejected so that typos fail loudly. See README.md for the full field
reference. Built-in scenarios ship in ``builtin_scenarios/``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from . import analysis as an
from . import experiment as ex
from .atomic import (TAU_D52, QuadrupoleEnvironment, Sublevel, coherence_sensitivities,
                     linewidth_pairs, quadrupole_pairs, theta_for_alpha)
from .errors import ConfigError, IonPairError, UnknownScenario
from .noise import NoiseModel
from .trap import TrapConfig, gradient_from_axial_freq, two_ion_distance

KINDS = ("gradient", "quadrupole_product", "quadrupole_bell", "linewidth", "custom")

_SCHEMA = {
    "": {"name", "kind", "description", "seed", "shots_per_point", "outputs", "workers",
         "trap", "atoms", "noise", "scan", "analysis", "gradient", "custom"},
    "trap": {"axial_freq", "axial_freqs", "radial_freq", "ion_mass"},
    "atoms": {"alpha", "theta_moment", "beta_deg", "tau_d", "B0", "zeeman2_offset",
              "leak_as", "prep_fidelity"},
    "noise": {"b_rms", "b_corr_time", "laser_fwhm", "laser_offset"},
    "scan": {"waits", "wait_first", "wait_start", "wait_stop", "wait_num",
             "phases", "phases_num", "policy", "phi0", "phi1", "phi2"},
    "analysis": {"dephasing", "exclude_below", "fit_offset"},
    "gradient": {"db_dz", "distance"},
    "custom": {"preparation", "bell_phi", "ion1", "ion2"},
    "ion": {"lower", "upper", "laser_coupled", "static_detuning"},
}

_POLICIES = {"fixed", "randomized_laser", "randomized_bfield"}


# Plan builders --------------------------------------------------------------

def quadrupole_env(gradient: float, alpha: float, beta: float = 0.0,
                   tau_d: float = TAU_D52) -> QuadrupoleEnvironment:
    """Environment whose quadrupole moment makes the parity slope equal ``alpha``."""
    probe = quadrupole_pairs(QuadrupoleEnvironment(1.0, beta, 1.0), tau_d)
    theta = theta_for_alpha(alpha, probe, beta, combination=-1)
    return QuadrupoleEnvironment(gradient, beta, theta)


def quadrupole_plan(gradient: float, alpha: float, preparation, waits,
                    shots_per_point: int = 100, noise: NoiseModel | None = None,
                    beta: float = 0.0, tau_d: float = TAU_D52, B0: float = 3.0,
                    offset: float = 0.0, leak_as: str = "S",
                    prep_fidelity=(1.0, 1.0)) -> ex.RamseyPlan:
    env = quadrupole_env(gradient, alpha, beta, tau_d)
    pairs = quadrupole_pairs(env, tau_d, offset)
    return ex.RamseyPlan(preparation, pairs, ex.WaitScan(tuple(waits)), ex.Fixed(),
                         shots_per_point, noise or NoiseModel(), env, B0, leak_as,
                         tuple(prep_fidelity))


def quadrupole_frequency(plan: ex.RamseyPlan) -> float:
    """Noise-free parity frequency of a quadrupole plan, Hz."""
    p1, p2 = plan.pairs
    return abs(p1.detuning(plan.env, plan.B0) - p2.detuning(plan.env, plan.B0))


def linewidth_plan(wait: float, phases, shots_per_point: int = 500,
                   noise: NoiseModel | None = None, B0: float = 3.0,
                   policy=None, tau_d: float = TAU_D52) -> ex.RamseyPlan:
    pairs = linewidth_pairs(tau_d=tau_d)
    return ex.RamseyPlan(ex.Product(), pairs, ex.PhaseScan(tuple(phases), wait),
                         policy or ex.RandomizedLaserSensitive(), shots_per_point,
                         noise or NoiseModel(), QuadrupoleEnvironment(), B0)


def run_quadrupole_sweep(gradients, alpha: float, preparation, waits,
                         shots_per_point: int, noise: NoiseModel, workers: int = 1,
                         exclude_below: float = 0.0, **plan_kw):
    """Wait scan and frequency fit at each gradient, then a straight-line fit."""
    points, fits = [], []
    for k, g in enumerate(gradients):
        plan = quadrupole_plan(g, alpha, preparation, waits, shots_per_point,
                               noise.with_seed(_sub_seed(noise.master_seed, k)), **plan_kw)
        traces = ex.run_plan(plan, workers)
        fits.append(an.fit_damped_sinusoid(traces, exclude_below=exclude_below))
        points.append((g, plan, traces))
    freqs = [f["freq"] for f in fits]
    errs = [f.err("freq") for f in fits]
    line = an.fit_line(list(gradients), freqs, errs)
    return points, fits, line


def _sub_seed(seed: int, k: int) -> int:
    """Independent seed for the k-th sub-experiment of a scenario."""
    h = hashlib.sha256(f"{int(seed)}:{int(k)}".encode()).digest()
    return int.from_bytes(h[:8], "little")


def run_linewidth(waits, phases, shots_per_point: int, noise: NoiseModel,
                  workers: int = 1, B0: float = 3.0, policy=None):
    """Phase scans at each wait; returns per-wait traces, contrast fits and the Gaussian fit."""
    per_wait = []
    for k, w in enumerate(waits):
        plan = linewidth_plan(w, phases, shots_per_point,
                              noise.with_seed(_sub_seed(noise.master_seed, k)), B0, policy)
        traces = ex.run_plan(plan, workers)
        per_wait.append((w, plan, traces, an.contrast_from_phase_scan(traces)))
    c = [p[3]["contrast"] for p in per_wait]
    ce = [p[3].err("contrast") for p in per_wait]
    gauss = an.fit_contrast_gaussian(list(waits), c, ce) if len(waits) >= 5 else None
    return per_wait, gauss


# Scenario files -------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    kind: str
    data: dict
    text: str = ""
    source: str = ""

    @property
    def outputs(self) -> str:
        return self.data.get("outputs", self.name)

    @property
    def seed(self) -> int:
        return int(self.data.get("seed", 1))

    def config_hash(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _check_keys(table: dict, allowed: set, where: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{where}{key}: unknown key")


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}{key}: required field missing")
    return table[key]


def _num(value, where: str, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where}: must be > 0")
    if nonneg and value < 0:
        raise ConfigError(f"{where}: must be >= 0")
    return value


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    _check_keys(data, _SCHEMA[""], "")
    for table in ("trap", "atoms", "noise", "scan", "analysis", "gradient", "custom"):
        if table in data:
            if not isinstance(data[table], dict):
                raise ConfigError(f"{table}: expected a table")
            _check_keys(data[table], _SCHEMA[table], f"{table}.")
    name = _need(data, "name", "")
    if not isinstance(name, str) or not name.strip():
        raise ConfigError("name: must be a non-empty string")
    kind = _need(data, "kind", "")
    if kind not in KINDS:
        raise ConfigError(f"kind: must be one of {', '.join(KINDS)}")
    shots = _need(data, "shots_per_point", "")
    if isinstance(shots, bool) or not isinstance(shots, int) or shots < 1:
        raise ConfigError("shots_per_point: must be an integer >= 1")
    scn = Scenario(name, kind, data, text, source)
    build_runner(scn)  # full validation of the nested tables
    return scn


def _waits(scan: dict) -> list[float]:
    if "waits" in scan:
        waits = scan["waits"]
        if not isinstance(waits, list) or not waits:
            raise ConfigError("scan.waits: must be a non-empty list")
        out = [_num(w, "scan.waits", nonneg=True) for w in waits]
    elif "wait_stop" in scan or "wait_num" in scan:
        start = _num(scan.get("wait_start", 0.0), "scan.wait_start", nonneg=True)
        stop = _num(_need(scan, "wait_stop", "scan."), "scan.wait_stop", positive=True)
        num = _need(scan, "wait_num", "scan.")
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ConfigError("scan.wait_num: must be an integer >= 1")
        out = list(np.linspace(start, stop, num))
    else:
        raise ConfigError("scan.waits: required field missing (or wait_stop/wait_num)")
    if "wait_first" in scan:
        out = [_num(scan["wait_first"], "scan.wait_first", nonneg=True)] + out
    return [float(w) for w in out]


def _phases(scan: dict) -> list[float]:
    if "phases" in scan:
        ph = scan["phases"]
        if not isinstance(ph, list) or len(ph) < 3:
            raise ConfigError("scan.phases: need a list of >= 3 phases")
        return [_num(p, "scan.phases") for p in ph]
    num = scan.get("phases_num", 16)
    if isinstance(num, bool) or not isinstance(num, int) or num < 3:
        raise ConfigError("scan.phases_num: must be an integer >= 3")
    return list(np.linspace(0, 2 * np.pi, num, endpoint=False))


def _policy(scan: dict):
    name = scan.get("policy", "fixed")
    if name not in _POLICIES:
        raise ConfigError(f"scan.policy: must be one of {', '.join(sorted(_POLICIES))}")
    if name == "fixed":
        return ex.Fixed(_num(scan.get("phi1", 0.0), "scan.phi1"),
                        _num(scan.get("phi2", 0.0), "scan.phi2"))
    phi0 = _num(scan.get("phi0", 0.0), "scan.phi0")
    if name == "randomized_laser":
        return ex.RandomizedLaserSensitive(phi0)
    return ex.RandomizedBFieldSensitive(phi0)


def _noise(data: dict, seed: int) -> NoiseModel:
    t = data.get("noise", {})
    return NoiseModel(_num(t.get("b_rms", 0.0), "noise.b_rms", nonneg=True),
                      _num(t.get("b_corr_time", 0.1), "noise.b_corr_time", positive=True),
                      _num(t.get("laser_fwhm", 0.0), "noise.laser_fwhm", nonneg=True),
                      _num(t.get("laser_offset", 0.0), "noise.laser_offset"),
                      seed)


def _trap_gradients(data: dict):
    t = data.get("trap", {})
    radial = _num(t.get("radial_freq", 4e6), "trap.radial_freq", positive=True)
    mass = _num(t.get("ion_mass", 40.0), "trap.ion_mass", positive=True)
    if "axial_freqs" in t:
        freqs = t["axial_freqs"]
        if not isinstance(freqs, list) or len(freqs) < 2:
            raise ConfigError("trap.axial_freqs: need a list of >= 2 frequencies")
    else:
        freqs = [_need(t, "axial_freq", "trap.")]
    cfgs = []
    for f in freqs:
        try:
            cfgs.append(TrapConfig(_num(f, "trap.axial_freq", positive=True), radial, mass))
        except ConfigError as exc:
            raise ConfigError(f"trap.axial_freq: {exc}") from exc
    return cfgs, "axial_freqs" in t


def _atoms(data: dict) -> dict:
    a = data.get("atoms", {})
    out = {"beta": math.radians(_num(a.get("beta_deg", 0.0), "atoms.beta_deg")),
           "tau_d": _num(a.get("tau_d", TAU_D52), "atoms.tau_d", positive=True),
           "B0": _num(a.get("B0", 3.0), "atoms.B0"),
           "offset": _num(a.get("zeeman2_offset", 0.0), "atoms.zeeman2_offset"),
           "leak_as": a.get("leak_as", "S")}
    if out["leak_as"] not in ("S", "D"):
        raise ConfigError("atoms.leak_as: must be 'S' or 'D'")
    fid = a.get("prep_fidelity", [1.0, 1.0])
    if not isinstance(fid, list) or len(fid) != 2:
        raise ConfigError("atoms.prep_fidelity: need two numbers")
    out["prep_fidelity"] = tuple(_num(f, "atoms.prep_fidelity", nonneg=True) for f in fid)
    if any(f > 1 for f in out["prep_fidelity"]):
        raise ConfigError("atoms.prep_fidelity: entries must be <= 1")
    if "alpha" in a and "theta_moment" in a:
        raise ConfigError("atoms.alpha: give either alpha or theta_moment, not both")
    if "alpha" in a:
        out["alpha"] = _num(a["alpha"], "atoms.alpha", positive=True)
    elif "theta_moment" in a:
        theta = _num(a["theta_moment"], "atoms.theta_moment")
        probe = quadrupole_pairs(QuadrupoleEnvironment(1.0, out["beta"], 1.0), out["tau_d"])
        out["alpha"] = theta / theta_for_alpha(1.0, probe, out["beta"])
    return out


def _analysis(data: dict) -> dict:
    a = data.get("analysis", {})
    deph = a.get("dephasing", "explicit")
    if deph not in ("explicit", "emergent"):
        raise ConfigError("analysis.dephasing: must be 'explicit' or 'emergent'")
    fo = a.get("fit_offset", False)
    if not isinstance(fo, bool):
        raise ConfigError("analysis.fit_offset: must be true or false")
    return {"dephasing": deph,
            "exclude_below": _num(a.get("exclude_below", 0.0), "analysis.exclude_below",
                                  nonneg=True),
            "fit_offset": fo}


def _sublevel(spec, where: str) -> Sublevel:
    if not isinstance(spec, list) or len(spec) != 2:
        raise ConfigError(f"{where}: expected [term, m]")
    try:
        return Sublevel(spec[0], _num(spec[1], where))
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _custom_pairs(data: dict, env: QuadrupoleEnvironment, tau_d: float):
    c = _need(data, "custom", "")
    pairs = []
    for key in ("ion1", "ion2"):
        ion = _need(c, key, "custom.")
        if not isinstance(ion, dict):
            raise ConfigError(f"custom.{key}: expected a table")
        _check_keys(ion, _SCHEMA["ion"], f"custom.{key}.")
        lo = _sublevel(_need(ion, "lower", f"custom.{key}."), f"custom.{key}.lower")
        up = _sublevel(_need(ion, "upper", f"custom.{key}."), f"custom.{key}.upper")
        if tau_d != TAU_D52:
            lo = Sublevel(lo.term, lo.m, 0.0 if lo.decay_rate == 0 else 1 / tau_d)
            up = Sublevel(up.term, up.m, 0.0 if up.decay_rate == 0 else 1 / tau_d)
        try:
            pairs.append(coherence_sensitivities(
                (lo, up), env, bool(ion.get("laser_coupled", False)),
                _num(ion.get("static_detuning", 0.0), f"custom.{key}.static_detuning")))
        except ConfigError as exc:
            raise ConfigError(f"custom.{key}: {exc}") from exc
    return tuple(pairs)


def _custom_preparation(data: dict):
    c = data.get("custom", {})
    prep = c.get("preparation", "product")
    phi = _num(c.get("bell_phi", 0.0), "custom.bell_phi")
    table = {"product": ex.Product(), "dephased_product": ex.DephasedProduct(),
             "bell": ex.Bell(phi), "bell_correlated": ex.Bell(phi, True)}
    if prep not in table:
        raise ConfigError(f"custom.preparation: must be one of {', '.join(table)}")
    return table[prep]


# Execution ------------------------------------------------------------------

@dataclass
class ScenarioResult:
    columns: list
    rows: list
    report: dict
    converged: bool = True
    extra: dict = field(default_factory=dict)


def _fit_dict(fit: an.FitResult) -> dict:
    return {"params": fit.params, "stderrs": fit.stderrs,
            "chi2_reduced": fit.chi2_reduced, "converged": fit.converged}


def _trace_rows(traces, prefix=()):
    return [list(prefix) + [p.wait, p.parity_mean, p.parity_stderr,
                            p.single_ion_means[0], p.single_ion_means[1]] for p in traces]


def build_runner(scn: Scenario):
    """Validate a scenario and return a callable (seed, shots, workers) -> ScenarioResult."""
    data = scn.data
    scan = data.get("scan", {})
    atoms = _atoms(data)
    opts = _analysis(data)
    if scn.kind in ("quadrupole_product", "quadrupole_bell"):
        return _quadrupole_runner(scn, scan, atoms, opts)
    if scn.kind == "linewidth":
        return _linewidth_runner(scn, scan, atoms)
    if scn.kind == "gradient":
        return _gradient_runner(scn, scan, atoms, opts)
    return _custom_runner(scn, scan, atoms, opts)


def _quadrupole_runner(scn, scan, atoms, opts):
    data = scn.data
    if "alpha" not in atoms:
        raise ConfigError("atoms.alpha: required field missing (or atoms.theta_moment)")
    cfgs, sweep = _trap_gradients(data)
    gradients = [gradient_from_axial_freq(c) for c in cfgs]
    waits = _waits(scan)
    if scn.kind == "quadrupole_bell":
        prep = ex.Bell(0.0)
    else:
        prep = ex.DephasedProduct() if opts["dephasing"] == "explicit" else ex.Product()
    _noise(data, scn.seed)
    kw = dict(beta=atoms["beta"], tau_d=atoms["tau_d"], B0=atoms["B0"],
              offset=atoms["offset"], leak_as=atoms["leak_as"],
              prep_fidelity=atoms["prep_fidelity"])

    def run(seed, shots, workers):
        noise = _noise(data, seed)
        if sweep:
            points, fits, line = run_quadrupole_sweep(
                gradients, atoms["alpha"], prep, waits, shots, noise, workers,
                opts["exclude_below"], **kw)
            rows = []
            for (g, plan, traces) in points:
                rows += _trace_rows(traces, (g,))
            report = {
                "alpha_true": atoms["alpha"],
                "line_fit": _fit_dict(line),
                "points": [{"axial_freq": c.axial_freq, "gradient": g,
                            "analytic_freq": quadrupole_frequency(plan),
                            "fit": _fit_dict(f)}
                           for c, (g, plan, _), f in zip(cfgs, points, fits)],
                "shots_total": shots * len(waits) * len(gradients),
                "max_wait": max(waits),
            }
            return ScenarioResult(["gradient_v_per_mm2", "wait_s", "parity", "parity_err",
                                   "ion1_mean", "ion2_mean"], rows, report,
                                  all(f.converged for f in fits),
                                  {"points": points, "fits": fits, "line": line})
        plan = quadrupole_plan(gradients[0], atoms["alpha"], prep, waits, shots, noise, **kw)
        traces = ex.run_plan(plan, workers)
        fit = an.fit_damped_sinusoid(traces, opts["exclude_below"], opts["fit_offset"])
        report = {"gradient": gradients[0], "axial_freq": cfgs[0].axial_freq,
                  "ion_distance": two_ion_distance(cfgs[0]),
                  "alpha_true": atoms["alpha"], "analytic_freq": quadrupole_frequency(plan),
                  "tau_d_expected": atoms["tau_d"] / 2, "fit": _fit_dict(fit)}
        return ScenarioResult(["wait_s", "parity", "parity_err", "ion1_mean", "ion2_mean"],
                              _trace_rows(traces), report, fit.converged,
                              {"plan": plan, "traces": traces, "fit": fit})
    return run


def _linewidth_runner(scn, scan, atoms):
    data = scn.data
    waits = _waits(scan)
    phases = _phases(scan)
    policy = _policy(scan) if "policy" in scan else ex.RandomizedLaserSensitive()
    _noise(data, scn.seed)

    def run(seed, shots, workers):
        noise = _noise(data, seed)
        per_wait, gauss = run_linewidth(waits, phases, shots, noise, workers,
                                        atoms["B0"], policy)
        rows, flat = [], 0.0
        for w, plan, traces, c in per_wait:
            dc = ex.expected_single_ion(plan, w)
            for p in traces:
                rows.append([w, p.phase, p.parity_mean, p.parity_stderr,
                             p.single_ion_means[0], p.single_ion_means[1]])
                flat = max(flat, *(abs(p.single_ion_means[i] - dc[i]) for i in (0, 1)))
        report = {"contrast": [{"wait": w, "fit": _fit_dict(c)}
                               for w, _, _, c in per_wait],
                  "single_ion_max_deviation": flat,
                  "single_ion_bound": 4 / math.sqrt(shots),
                  "laser_fwhm_true": noise.laser_fwhm}
        converged = True
        if gauss is not None:
            report["gaussian_fit"] = _fit_dict(gauss)
            if gauss.converged:
                report["tau_half"] = gauss["tau_half"]
                report["fwhm"] = an.linewidth_from_tau_half(gauss["tau_half"])
            converged = gauss.converged
        return ScenarioResult(["wait_s", "phase_rad", "parity", "parity_err",
                               "ion1_mean", "ion2_mean"], rows, report, converged,
                              {"per_wait": per_wait, "gauss": gauss})
    return run


def _gradient_runner(scn, scan, atoms, opts):
    data = scn.data
    g = _need(data, "gradient", "")
    _check_keys(g, _SCHEMA["gradient"], "gradient.")
    db_dz = _num(_need(g, "db_dz", "gradient."), "gradient.db_dz")
    if "distance" in g:
        distance = _num(g["distance"], "gradient.distance", positive=True)
    else:
        cfgs, _ = _trap_gradients(data)
        distance = two_ion_distance(cfgs[0])
    waits = _waits(scan)
    _noise(data, scn.seed)

    def run(seed, shots, workers):
        res = ex.gradient_scenario(db_dz, distance, waits, shots, _noise(data, seed),
                                   workers=workers)
        report = {"db_dz": db_dz, "distance": distance, "delta_B": res.delta_B,
                  "analytic_freq": res.analytic_freq, "fit": _fit_dict(res.fit)}
        return ScenarioResult(["wait_s", "parity", "parity_err", "ion1_mean", "ion2_mean"],
                              _trace_rows(res.traces), report, res.fit.converged,
                              {"result": res})
    return run


def _custom_runner(scn, scan, atoms, opts):
    data = scn.data
    gradient = 0.0
    if "trap" in data:
        cfgs, _ = _trap_gradients(data)
        gradient = gradient_from_axial_freq(cfgs[0])
    theta = 0.0
    if "alpha" in atoms:
        theta = quadrupole_env(1.0, atoms["alpha"], atoms["beta"], atoms["tau_d"]).theta_moment
    env = QuadrupoleEnvironment(gradient, atoms["beta"], theta)
    pairs = _custom_pairs(data, env, atoms["tau_d"])
    prep = _custom_preparation(data)
    policy = _policy(scan)
    waits = _waits(scan)
    phase_scan = "phases" in scan or "phases_num" in scan
    if phase_scan and len(waits) != 1:
        raise ConfigError("scan.waits: a phase scan takes exactly one wait")
    scan_obj = ex.PhaseScan(tuple(_phases(scan)), waits[0]) if phase_scan \
        else ex.WaitScan(tuple(waits))

    def make(seed, shots):
        return ex.RamseyPlan(prep, pairs, scan_obj, policy, shots, _noise(data, seed), env,
                             atoms["B0"], atoms["leak_as"], atoms["prep_fidelity"])

    make(scn.seed, int(data["shots_per_point"]))

    def run(seed, shots, workers):
        plan = make(seed, shots)
        traces = ex.run_plan(plan, workers)
        report = {"expected_parity": [ex.expected_parity(plan, p.wait, p.phase)
                                      for p in traces]}
        converged = True
        try:
            if phase_scan:
                fit = an.contrast_from_phase_scan(traces)
            else:
                fit = an.fit_damped_sinusoid(traces, opts["exclude_below"], opts["fit_offset"])
                converged = fit.converged
            report["fit"] = _fit_dict(fit)
        except IonPairError as exc:
            report["fit_error"] = str(exc)
            converged = False
        cols = ["wait_s", "phase_rad", "parity", "parity_err", "ion1_mean", "ion2_mean"]
        rows = [[p.wait, p.phase, p.parity_mean, p.parity_stderr, *p.single_ion_means]
                for p in traces]
        return ScenarioResult(cols, rows, report, converged, {"plan": plan, "traces": traces})
    return run


def run_scenario(scn: Scenario, seed: int | None = None, shots_override: int | None = None,
                 workers: int = 1) -> ScenarioResult:
    shots = int(shots_override or scn.data["shots_per_point"])
    if shots < 1:
        raise ConfigError("shots_override: must be >= 1")
    runner = build_runner(scn)
    return runner(scn.seed if seed is None else int(seed), shots, workers)


# Built-ins ------------------------------------------------------------------

def _builtin_dir():
    return resources.files(__package__) / "builtin_scenarios"


def builtin_names() -> list[str]:
    return sorted(p.name[:-4] for p in _builtin_dir().iterdir() if p.name.endswith(".scn"))


def builtin_text(name: str) -> str:
    path = _builtin_dir() / f"{name}.scn"
    if not path.is_file():
        raise UnknownScenario(name)
    return path.read_text()


def load_scenario(name_or_path) -> Scenario:
    """Load a scenario from a file path, or by built-in name."""
    p = Path(name_or_path)
    if p.is_file():
        return parse_scenario(p.read_text(), str(p))
    stem = p.name[:-4] if p.name.endswith(".scn") else p.name
    if stem in builtin_names():
        return parse_scenario(builtin_text(stem), f"builtin:{stem}")
    raise UnknownScenario(str(name_or_path))


def describe(name: str) -> str:
    """Human-readable summary of a built-in scenario (or a family sharing a prefix)."""
    names = [name] if name in builtin_names() else \
        [n for n in builtin_names() if n.startswith(name + "_")]
    if not names:
        raise UnknownScenario(name)
    return "\n\n".join(_describe_one(load_scenario(n)) for n in names)


def _describe_one(scn: Scenario) -> str:
    d = scn.data
    lines = [f"{scn.name} ({scn.kind})"]
    if "description" in d:
        lines.append(f"  {d['description']}")
    lines.append(f"  shots per point N = {d['shots_per_point']}, seed = {scn.seed}")
    trap = d.get("trap", {})
    if "axial_freqs" in trap:
        cfgs, _ = _trap_gradients(d)
        grads = ", ".join(f"{gradient_from_axial_freq(c):.3f}" for c in cfgs)
        lines.append(f"  gradient grid (V/mm^2): {grads}")
    elif "axial_freq" in trap:
        cfgs, _ = _trap_gradients(d)
        lines.append(f"  gradient (V/mm^2): {gradient_from_axial_freq(cfgs[0]):.3f}")
    waits = _waits(d.get("scan", {})) if d.get("scan") else []
    if waits:
        lines.append(f"  waits: {len(waits)} points, {min(waits) * 1e3:g}-{max(waits) * 1e3:g} ms")
    if scn.kind == "linewidth":
        lines.append(f"  phases per scan: {len(_phases(d.get('scan', {})))}")
    return "\n".join(lines)
