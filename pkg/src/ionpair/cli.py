"""Command-line scenario runner.

    ionpair run SCENARIO [--seed N] [--shots-override N] [--out DIR] [--format csv|json]
    ionpair run MANIFEST.json          # replay a previous run
    ionpair list-scenarios
    ionpair describe NAME

Exit codes: 0 ok, 2 validation error (nothing written), 3 fit did not converge.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import scenarios as sc
from .errors import ConfigError, IonPairError, UnknownScenario

EXIT_OK, EXIT_INVALID, EXIT_NOFIT = 0, 2, 3


def _plain(obj):
    """Make report values JSON-safe (numpy scalars, tuples, non-finite floats)."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    return obj


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def trace_csv(result: sc.ScenarioResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def trace_json(result: sc.ScenarioResult) -> str:
    return json.dumps({"columns": result.columns, "rows": _plain(result.rows)}, indent=1) + "\n"


def _dump(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _versions() -> dict:
    return {"ionpair": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def _load_target(target: str):
    """Scenario from a path or built-in name, or the saved settings of a manifest."""
    p = Path(target)
    if p.suffix == ".json" and p.is_file():
        try:
            man = json.loads(p.read_text())
            text = man["scenario_text"]
            seed, shots = man["seed"], man.get("shots_override")
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"manifest: unreadable ({exc})") from exc
        scn = sc.parse_scenario(text, str(p))
        scn.source = man.get("scenario_source", scn.source)
        return scn, seed, shots
    return sc.load_scenario(target), None, None


def cmd_run(args) -> int:
    try:
        scn, m_seed, m_shots = _load_target(args.scenario)
        seed = args.seed if args.seed is not None else (m_seed if m_seed is not None else scn.seed)
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("--seed: must fit in 64 bits")
        shots = args.shots_override if args.shots_override is not None else m_shots
        if shots is not None and shots < 1:
            raise ConfigError("--shots-override: must be >= 1")
        if args.workers < 1:
            raise ConfigError("--workers: must be >= 1")
        out = Path(args.out)
        if out.exists() and not (out.is_dir() and os.access(out, os.W_OK)):
            raise ConfigError(f"--out: {out} is not a writable directory")
    except (ConfigError, UnknownScenario) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        result = sc.run_scenario(scn, seed, shots, args.workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IonPairError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_NOFIT

    out.mkdir(parents=True, exist_ok=True)
    prefix = scn.outputs
    trace = trace_csv(result) if args.format == "csv" else trace_json(result)
    files = {f"{prefix}_trace.{args.format}": trace,
             f"{prefix}_report.json": _dump(result.report)}
    manifest = {
        "scenario_name": scn.name,
        "scenario_source": scn.source,
        "scenario_text": scn.text,
        "config_sha256": scn.config_hash(),
        "seed": seed,
        "shots_override": shots,
        "format": args.format,
        "versions": _versions(),
        "outputs": {name: _sha(text) for name, text in files.items()},
    }
    files[f"{prefix}_manifest.json"] = _dump(manifest)
    for name, text in files.items():
        (out / name).write_text(text)

    fit = result.report.get("fit") or result.report.get("line_fit") \
        or result.report.get("gaussian_fit")
    if fit:
        summary = ", ".join(f"{k}={v:.6g}" for k, v in fit["params"].items())
        print(f"{scn.name}: {summary}")
    print(f"wrote {', '.join(files)} to {out}")
    if not result.converged:
        print("fit did not converge", file=sys.stderr)
        return EXIT_NOFIT
    return EXIT_OK


def cmd_list(args) -> int:
    for name in sc.builtin_names():
        print(name)
    return EXIT_OK


def cmd_describe(args) -> int:
    try:
        print(sc.describe(args.name))
    except UnknownScenario:
        print(f"error: unknown scenario {args.name!r}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ionpair", description="Two-ion parity Ramsey scenarios")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file, built-in name or manifest")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int)
    r.add_argument("--shots-override", type=int)
    r.add_argument("--out", default=".")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)
    sub.add_parser("list-scenarios", help="list built-in scenarios").set_defaults(func=cmd_list)
    d = sub.add_parser("describe", help="summarise a built-in scenario")
    d.add_argument("name")
    d.set_defaults(func=cmd_describe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
