"""Command-line front-end.

Every subcommand prints a deterministic JSON document (sorted keys); the
``sharpness`` command can emit its curve as CSV instead. Exit status is 0
when every requested verdict passes, 1 when a verdict fails and 2 for
configuration errors or inadmissible Rellich parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import algebra, constants as C
from .frames import parse_frame_spec
from .testfns import make_random_bump
from .verify import (QuadSettings, auxiliary_hardy_check, hardy_chain, harmonicity_audit, rellich_check,
                     sharpness_sweep)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "p": 2.0,
    "theta": 0.0,
    "seed": 0,
    "format": "json",
    "which": "hardy",
    "eps_grid": [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4],
    "annulus": [0.5, 2.0],
    "bumps": 3,
}
COMMAND_SAMPLES = {"identity": 10_000, "verify-hardy": 50_000, "verify-rellich": 50_000, "harmonicity": 1000}
COMMAND_P = {"identity": "2,2.5,3,4,6", "harmonicity": "2,3,4"}


class ConfigError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subhardy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, frame=True):
        if frame:
            p.add_argument("--frame", help="kind:args, e.g. euclidean:5, heisenberg:1, "
                                           "heisenberg_greiner:1,2, baouendi_grushin:2,1,1, or a JSON object")
        p.add_argument("--p", help="exponent p >= 2 (comma list where several are accepted)")
        p.add_argument("--theta", type=float, help="weight exponent theta")
        p.add_argument("--samples", type=int, help="Monte-Carlo samples / random points")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), help="output format")
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        return p

    common(sub.add_parser("constants", help="sharp constants, extremal exponents, admissibility"))
    common(sub.add_parser("identity", help="residual sweep of the pointwise L^p identity"), frame=False)
    for name in ("verify-hardy", "verify-rellich"):
        p = common(sub.add_parser(name, help=f"{name.split('-')[1].title()} inequality on random bumps"))
        p.add_argument("--bumps", type=int, help="number of random test functions")
        p.add_argument("--annulus", help="support annulus r_in,r_out in gauge units")
    p = common(sub.add_parser("sharpness", help="extremal-sequence sweep and fitted constant"))
    p.add_argument("--eps-grid", dest="eps_grid", help="strictly decreasing eps values, comma separated")
    p.add_argument("--which", choices=("hardy", "rellich", "auxiliary"))
    common(sub.add_parser("harmonicity", help="L_p-harmonicity and gauge identity audit"))
    common(sub.add_parser("selftest", help="fixed-seed property battery"), frame=False)
    return parser


def resolve_config(args) -> dict:
    """Merge defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS)
    if args.command in COMMAND_SAMPLES:
        cfg["samples"] = COMMAND_SAMPLES[args.command]
    else:
        cfg["samples"] = 20_000
    if args.command in COMMAND_P:
        cfg["p"] = COMMAND_P[args.command]
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, val in vars(args).items():
        if key not in ("command", "config") and val is not None:
            cfg[key] = val
    return cfg


def _frame(cfg):
    if "frame" not in cfg or cfg["frame"] is None:
        raise ConfigError("--frame is required")
    try:
        return parse_frame_spec(cfg["frame"])
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid frame {cfg['frame']!r}: {exc}") from exc


def _params(cfg, frame, p=None):
    try:
        p = _floats(cfg["p"])[0] if p is None else p
        return C.InequalityParams.for_frame(frame, p, float(cfg["theta"]))
    except (ValueError, IndexError) as exc:
        raise ConfigError(str(exc)) from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands: each returns (document, exit code); CSV commands may return text


def cmd_constants(cfg):
    frame, _ = _frame(cfg)
    params = _params(cfg, frame)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", C.CriticalWeightWarning)
        sc = C.sharp_constants(params, frame)
    doc = {"command": "constants", "frame": frame.to_dict(),
           "params": {"p": params.p, "theta": params.theta, "Q": params.Q}}
    consts = sc.to_dict()
    doc["constants"] = consts
    doc.update({k: consts[k] for k in ("hardy", "rellich", "auxiliary_hardy",
                                       "hardy_extremal_exponent", "rellich_extremal_exponent")})
    doc["rellich_admissible"] = sc.rellich_admissibility.ok
    doc["rellich_reasons"] = list(sc.rellich_admissibility.reasons)
    doc["warnings"] = sorted({f"critical weight: {c}" for c in sc.critical})
    for w in caught:
        if issubclass(w.category, C.CriticalWeightWarning) and str(w.message).startswith("critical"):
            print(f"warning: {w.message}", file=sys.stderr)
    return doc, EXIT_OK


def cmd_identity(cfg):
    ps = _floats(cfg["p"])
    n = int(cfg["samples"])
    seed = int(cfg["seed"])
    rows = {}
    ok = True
    for i, p in enumerate(ps):
        if p < 2:
            raise ConfigError("p must be >= 2")
        rng = np.random.default_rng([seed, i])
        fg = rng.uniform(-3.0, 3.0, size=(n, 2))
        worst = max(algebra.identity_residual(p, f, g) for f, g in fg)
        tol = 1e-12 if p == 2 else 1e-8
        cp = algebra.cp_estimate(p)
        abc = rng.normal(size=(3, n)) * 3.0
        triple = bool(np.all(algebra.triple_power_bound_check(p, *abc, cp)))
        passed = worst <= tol and triple
        ok &= passed
        rows[f"{p:g}"] = {"max_residual": worst, "tolerance": tol, "cp": cp, "triple_bound_holds": triple,
                          "pass": passed}
    return {"command": "identity", "samples": n, "seed": seed, "per_p": rows,
            "verdict": "pass" if ok else "fail"}, EXIT_OK if ok else EXIT_FAIL


def _bump_reports(cfg, check):
    frame, gauge = _frame(cfg)
    params = _params(cfg, frame)
    annulus = _floats(cfg["annulus"])
    if len(annulus) != 2 or not (0 < annulus[0] < annulus[1]):
        raise ConfigError("annulus must be r_in,r_out with 0 < r_in < r_out")
    quad = QuadSettings(int(cfg["samples"]), int(cfg["seed"]))
    reports = []
    for b in range(int(cfg["bumps"])):
        u = make_random_bump(gauge, int(cfg["seed"]) * 1000 + b, annulus)
        reports.append(check(frame, gauge, params, u, quad))
    return frame, params, reports


def cmd_verify_hardy(cfg):
    def check(frame, gauge, params, u, quad):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", C.CriticalWeightWarning)
            return [hardy_chain(frame, gauge, params, u, quad), auxiliary_hardy_check(frame, gauge, params, u, quad)]

    frame, params, reps = _bump_reports(cfg, check)
    flat = [r for pair in reps for r in pair]
    ok = all(r.passed for r in flat)
    doc = {"command": "verify-hardy", "frame": frame.to_dict(),
           "params": {"p": params.p, "theta": params.theta, "Q": params.Q},
           "reports": [r.to_dict() for r in flat], "verdict": "pass" if ok else "fail"}
    return doc, EXIT_OK if ok else EXIT_FAIL


def cmd_verify_rellich(cfg):
    frame, _ = _frame(cfg)
    params = _params(cfg, frame)
    adm = C.rellich_admissible(params, frame)
    if not adm:
        doc = {"command": "verify-rellich", "frame": frame.to_dict(),
               "params": {"p": params.p, "theta": params.theta, "Q": params.Q},
               "admissibility": adm.to_dict(), "verdict": "inadmissible"}
        return doc, EXIT_CONFIG

    def check(frame, gauge, params, u, quad):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", C.CriticalWeightWarning)
            return rellich_check(frame, gauge, params, u, quad)

    frame, params, reps = _bump_reports(cfg, check)
    ok = all(r.passed for r in reps)
    doc = {"command": "verify-rellich", "frame": frame.to_dict(),
           "params": {"p": params.p, "theta": params.theta, "Q": params.Q},
           "admissibility": adm.to_dict(), "reports": [r.to_dict() for r in reps],
           "verdict": "pass" if ok else "fail"}
    return doc, EXIT_OK if ok else EXIT_FAIL


def cmd_sharpness(cfg):
    frame, gauge = _frame(cfg)
    params = _params(cfg, frame)
    which = cfg["which"]
    if which == "rellich":
        adm = C.rellich_admissible(params, frame)
        if not adm:
            return {"command": "sharpness", "frame": frame.to_dict(), "admissibility": adm.to_dict(),
                    "verdict": "inadmissible"}, EXIT_CONFIG
    grid = _floats(cfg["eps_grid"])
    try:
        rep = sharpness_sweep(frame, gauge, params, which, grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    code = EXIT_OK if rep.passed else EXIT_FAIL
    if cfg["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "L", "quotient", "stderr"])
        for row in rep.csv_rows():
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue(), code
    doc = {"command": "sharpness", "frame": frame.to_dict(),
           "params": {"p": params.p, "theta": params.theta, "Q": params.Q}, **rep.to_dict()}
    return doc, code


def cmd_harmonicity(cfg):
    frame, gauge = _frame(cfg)
    ps = _floats(cfg["p"])
    if any(p < 2 for p in ps):
        raise ConfigError("p must be >= 2")
    rep = harmonicity_audit(frame, gauge, ps, int(cfg["samples"]), int(cfg["seed"]))
    return {"command": "harmonicity", **rep.to_dict()}, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_selftest(cfg):
    from .selftest import run_selftest

    checks = run_selftest(int(cfg["seed"]), int(cfg["samples"]))
    ok = all(c["pass"] for c in checks)
    return {"command": "selftest", "seed": int(cfg["seed"]), "checks": checks,
            "verdict": "pass" if ok else "fail"}, EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "constants": cmd_constants,
    "identity": cmd_identity,
    "verify-hardy": cmd_verify_hardy,
    "verify-rellich": cmd_verify_rellich,
    "sharpness": cmd_sharpness,
    "harmonicity": cmd_harmonicity,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        if cfg["format"] == "csv" and args.command != "sharpness":
            raise ConfigError("CSV output is only available for the sharpness command")
        doc, code = COMMANDS[args.command](cfg)
    except (ConfigError, C.InadmissibleParameters) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = doc if isinstance(doc, str) else dumps(doc)
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
