"""Command-line front end.

Every command reads one JSON run configuration, writes its results into the
output directory and echoes the fully resolved configuration there as
``config.json``; feeding that file back reproduces the outputs byte for byte.

Exit status: 0 success (harness runs: no Fail), 1 a module error or a failed
check, 2 a configuration error.
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from typing import Any, Optional

from .bifurc import (bracket_fold, count_cycles, perturb_semistable, phi_surface, rotated_sweep,
                     solve_semistable)
from .cycles import find_cycles
from .errors import ConfigError, CycleLabError
from .field import FamilySpec, Polynomial2, VectorField2, build_family
from .flow import IntegratorConfig, integrate
from .retmap import scan, write_scan_csv
from .verify import (PROP1_CONFIG, PROP3_CONFIG, Prop1Settings, verify_prop1, verify_prop2,
                     verify_prop3)

COMMANDS = ("integrate", "retmap", "cycles", "semistable", "phi", "sweep", "verify")
PROPOSITIONS = ("prop1", "prop2", "prop3")

DEFAULTS: dict[str, Any] = {
    "integrate": {"init": [0.0, 1.0], "t_end": None, "uniform": None, "variational": False},
    "retmap": {"y_range": [0.1, 4.0], "n": 50},
    "cycles": {"y_range": [0.05, 10.0], "n": 60, "polylines": True},
    "semistable": {"b": 1.0, "c": -1.0, "init": None, "counts": True, "perturb": []},
    "phi": {"b_grid": [1.0, 2.0, 4.0], "c_grid": [-1.0]},
    "sweep": {"lambda_range": [0.5, 1.5], "n": 11, "y_range": [0.05, 10.0]},
    "verify": {
        "prop1": {"sample_count": 500, "seed": 0, "param_box": 2.0, "y_range": [1e-3, 5.0], "n": 40},
        "prop2": {"b_grid": [1.0], "c_grid": [-1.0], "uniqueness": True, "scaling": True},
        "prop3": {"eps": 0.1, "a_list": [0.0, 0.2, -0.2, 0.5, -0.5, 0.8, -0.8, 1.0, -1.0, 1.3, -1.3],
                  "y_range": [1e-3, 4.0], "n": 60},
    },
}

# Integrator defaults that differ from the library default, per command.
COMMAND_INTEGRATOR = {("verify", "prop1"): PROP1_CONFIG, ("verify", "prop3"): PROP3_CONFIG}

TOP_KEYS = {"system", "integrator", *COMMANDS}


# ---------------------------------------------------------------------------
# configuration


def _merge(defaults: dict, given: Any, where: str) -> dict:
    if given is None:
        return copy.deepcopy(defaults)
    if not isinstance(given, dict):
        raise ConfigError(f"'{where}' must be an object")
    extra = set(given) - set(defaults)
    if extra:
        raise ConfigError(f"unknown keys in '{where}': {sorted(extra)}")
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict):
            out[k] = _merge(defaults[k], v, f"{where}.{k}")
        else:
            out[k] = v
    return out


def _num(v, where: str) -> float:
    if isinstance(v, bool):
        raise ConfigError(f"{where} must be a number")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} is not a number: {v!r}") from None
    if not math.isfinite(x):
        raise ConfigError(f"{where} is not finite: {v!r}")
    return x


def _int(v, where: str, lo: int = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < lo:
        raise ConfigError(f"{where} must be an integer >= {lo}, got {v!r}")
    return int(v)


def _pair(v, where: str) -> list[float]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{where} must be a two-element list")
    return [_num(x, where) for x in v]


def _floats(v, where: str) -> list[float]:
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"{where} must be a non-empty list")
    return [_num(x, where) for x in v]


def _bool(v, where: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{where} must be true or false")
    return v


def _range(v, where: str) -> list[float]:
    lo, hi = _pair(v, where)
    if not 0 < lo < hi:
        raise ConfigError(f"{where} needs 0 < low < high, got {v}")
    return [lo, hi]


def _terms(obj, where: str) -> Polynomial2:
    if not isinstance(obj, list):
        raise ConfigError(f"{where} must be a list of [i, j, coefficient] triples")
    terms = {}
    for t in obj:
        if not isinstance(t, list) or len(t) != 3:
            raise ConfigError(f"{where} entries must be [i, j, coefficient]")
        i, j = _int(t[0], where, 0), _int(t[1], where, 0)
        if i + j > 6:
            raise ConfigError(f"{where}: degree {i + j} exceeds 6")
        terms[(i, j)] = terms.get((i, j), 0.0) + _num(t[2], where)
    return Polynomial2.from_terms(terms)


def resolve_system(obj) -> Optional[VectorField2]:
    """Family definition ``{"kind", "params"}`` or inline field ``{"P": [...], "Q": [...]}``."""
    if obj is None:
        return None
    if isinstance(obj, dict) and ("P" in obj or "Q" in obj):
        extra = set(obj) - {"P", "Q"}
        if extra:
            raise ConfigError(f"unknown keys in inline field: {sorted(extra)}")
        return VectorField2(_terms(obj.get("P", []), "system.P"), _terms(obj.get("Q", []), "system.Q"))
    return build_family(FamilySpec.from_json(obj))


def _canonical_system(obj):
    if obj is None:
        return None
    if isinstance(obj, dict) and ("P" in obj or "Q" in obj):
        return {k: obj[k] for k in ("P", "Q") if k in obj}
    return FamilySpec.from_json(obj).to_json()


def resolve_config(raw: Any, command: str, prop: Optional[str] = None,
                   seed: Optional[int] = None) -> dict:
    """Validate ``raw`` strictly and fill every default; the result is what gets echoed."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    extra = set(raw) - TOP_KEYS
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    cfg = {"system": _canonical_system(raw.get("system"))}
    base = COMMAND_INTEGRATOR.get((command, prop), IntegratorConfig())
    integ = raw.get("integrator")
    if integ is not None:
        if not isinstance(integ, dict):
            raise ConfigError("integrator block must be an object")
        integ = IntegratorConfig.from_json({**base.to_json(), **integ})
    else:
        integ = base
    cfg["integrator"] = integ.to_json()
    for name in COMMANDS:
        cfg[name] = _merge(DEFAULTS[name], raw.get(name), name)
    if seed is not None:
        cfg["verify"]["prop1"]["seed"] = seed
    _validate(cfg, command, prop)
    return cfg


def _validate(cfg: dict, command: str, prop: Optional[str]) -> None:
    if command in ("integrate", "retmap", "cycles", "sweep") and cfg["system"] is None:
        raise ConfigError(f"command '{command}' needs a 'system' block")
    b = cfg[command] if command != "verify" else cfg["verify"][prop]
    if command == "integrate":
        _pair(b["init"], "integrate.init")
        if b["t_end"] is not None and not _num(b["t_end"], "integrate.t_end") > 0:
            raise ConfigError("integrate.t_end must be positive")
        if b["uniform"] is not None:
            _int(b["uniform"], "integrate.uniform", 2)
        _bool(b["variational"], "integrate.variational")
    elif command in ("retmap", "cycles"):
        _range(b["y_range"], f"{command}.y_range")
        _int(b["n"], f"{command}.n", 2)
        if command == "cycles":
            _bool(b["polylines"], "cycles.polylines")
    elif command == "semistable":
        bb, cc = _num(b["b"], "semistable.b"), _num(b["c"], "semistable.c")
        if not bb * cc < 0:
            raise ConfigError(f"semistable needs b*c < 0, got b={bb}, c={cc}")
        if b["init"] is not None:
            _pair(b["init"], "semistable.init")
        _bool(b["counts"], "semistable.counts")
        if b["perturb"]:
            _floats(b["perturb"], "semistable.perturb")
    elif command == "phi":
        bs, cs = _floats(b["b_grid"], "phi.b_grid"), _floats(b["c_grid"], "phi.c_grid")
        bad = [(x, y) for x in bs for y in cs if not x * y < 0]
        if bad:
            raise ConfigError(f"phi grid needs b*c < 0 at every node; offending nodes {bad}")
    elif command == "sweep":
        _pair(b["lambda_range"], "sweep.lambda_range")
        _int(b["n"], "sweep.n", 1)
        _range(b["y_range"], "sweep.y_range")
        sys_obj = cfg["system"]
        if not (isinstance(sys_obj, dict) and sys_obj.get("kind") in ("eq1", "eq2")):
            raise ConfigError("sweep needs an eq1 or eq2 system")
    elif command == "verify":
        if prop == "prop1":
            _int(b["sample_count"], "verify.prop1.sample_count")
            _int(b["seed"], "verify.prop1.seed", 0)
            if not _num(b["param_box"], "verify.prop1.param_box") > 0:
                raise ConfigError("verify.prop1.param_box must be positive")
            _range(b["y_range"], "verify.prop1.y_range")
            _int(b["n"], "verify.prop1.n", 2)
        elif prop == "prop2":
            _floats(b["b_grid"], "verify.prop2.b_grid")
            _floats(b["c_grid"], "verify.prop2.c_grid")
            _bool(b["uniqueness"], "verify.prop2.uniqueness")
            _bool(b["scaling"], "verify.prop2.scaling")
        else:
            if not _num(b["eps"], "verify.prop3.eps") > 0:
                raise ConfigError("verify.prop3.eps must be positive")
            _floats(b["a_list"], "verify.prop3.a_list")
            _range(b["y_range"], "verify.prop3.y_range")
            _int(b["n"], "verify.prop3.n", 2)


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: {e}") from None


def _dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# commands


def cmd_integrate(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["integrate"]
    field = resolve_system(cfg["system"])
    traj = integrate(field, b["init"], IntegratorConfig.from_json(cfg["integrator"]),
                     t_end=b["t_end"], variational=b["variational"])
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    if b["uniform"]:
        traj.to_csv(os.path.join(out, "trajectory_uniform.csv"), uniform=b["uniform"])
    print(f"termination: {traj.reason} at t={traj.t_end!r}")
    return 0


def cmd_retmap(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["retmap"]
    samples = scan(resolve_system(cfg["system"]), b["y_range"], b["n"],
                   IntegratorConfig.from_json(cfg["integrator"]), workers=threads)
    write_scan_csv(samples, os.path.join(out, "retmap.csv"))
    ok = sum(s.ok for s in samples)
    print(f"{ok}/{len(samples)} samples returned")
    return 0


def cmd_cycles(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["cycles"]
    cs = find_cycles(resolve_system(cfg["system"]), b["y_range"], b["n"],
                     IntegratorConfig.from_json(cfg["integrator"]))
    cs.write(os.path.join(out, "cycles.json"),
             os.path.join(out, "cycle") if b["polylines"] else None)
    print(f"{len(cs)} cycle(s)" + (f"; notes: {', '.join(cs.notes)}" if cs.notes else ""))
    for c in cs:
        print(f"  y0={c.y0!r} period={c.period!r} class={c.klass.value}")
    return 0


def cmd_semistable(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["semistable"]
    icfg = IntegratorConfig.from_json(cfg["integrator"])
    bb, cc = float(b["b"]), float(b["c"])
    result: dict[str, Any] = {"b": bb, "c": cc}
    if b["init"] is None:
        fb = bracket_fold(bb, cc, icfg)
        result["bracket"] = {"a_lo": fb.a_lo, "a_hi": fb.a_hi, "y_guess": fb.y_guess,
                             "counts": list(fb.counts)}
        init = fb
    else:
        init = tuple(float(v) for v in b["init"])
    sol = solve_semistable(bb, cc, init, icfg)
    result["solution"] = sol.to_json()
    if b["counts"] and sol.converged:
        counts = {}
        for label, a in (("a=0", 0.0), ("a=a*/2", 0.5 * sol.a_star), ("a=1.5a*", 1.5 * sol.a_star)):
            cnt = count_cycles(bb, cc, a, icfg)
            counts[label] = {"a": a, "n_hyperbolic": cnt.n_hyperbolic,
                             "n_semistable": cnt.n_semistable, "y0s": list(cnt.y0s)}
        result["counts"] = counts
    if b["perturb"] and sol.converged:
        result["perturbation"] = [
            {"delta": p.delta, "a": p.a, "n_hyperbolic": p.n_hyperbolic, "n_semistable": p.n_semistable}
            for p in perturb_semistable(sol, [float(d) for d in b["perturb"]], icfg)]
    _dump(result, os.path.join(out, "semistable.json"))
    print(f"a*={sol.a_star!r} y0*={sol.y0_star!r} converged={sol.converged}")
    return 0 if sol.converged else 1


def cmd_phi(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["phi"]
    surf = phi_surface([float(v) for v in b["b_grid"]], [float(v) for v in b["c_grid"]],
                       IntegratorConfig.from_json(cfg["integrator"]))
    surf.write_csv(os.path.join(out, "phi.csv"))
    surf.write_json(os.path.join(out, "phi.json"))
    print(f"{len(surf.nodes)} node(s) solved, {len(surf.failures)} failure(s)")
    return 0 if surf.all_converged else 1


def cmd_sweep(cfg: dict, out: str, threads: int = 1) -> int:
    b = cfg["sweep"]
    res = rotated_sweep(FamilySpec.from_json(cfg["system"]), tuple(b["lambda_range"]), b["n"],
                        IntegratorConfig.from_json(cfg["integrator"]), tuple(b["y_range"]))
    res.write_csv(os.path.join(out, "sweep.csv"))
    ncyc = len(res.y_star[0]) if res.y_star else 0
    print(f"{ncyc} cycle(s) tracked; monotone: "
          + ", ".join(str(res.monotone(i)) for i in range(ncyc)))
    return 0


def cmd_verify(cfg: dict, out: str, prop: str, threads: int = 1) -> int:
    b = cfg["verify"][prop]
    icfg = IntegratorConfig.from_json(cfg["integrator"])
    if prop == "prop1":
        report = verify_prop1(b["sample_count"], b["seed"], float(b["param_box"]), icfg,
                               Prop1Settings(tuple(b["y_range"]), b["n"]))
    elif prop == "prop2":
        report = verify_prop2(b["b_grid"], b["c_grid"], icfg, b["uniqueness"], b["scaling"])
    else:
        report = verify_prop3(float(b["eps"]), b["a_list"], icfg, tuple(b["y_range"]), b["n"])
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(report.dumps())
    summary = report.summary()
    with open(os.path.join(out, "summary.txt"), "w") as fh:
        fh.write(summary)
    sys.stdout.write(summary)
    return report.exit_code


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomised harnesses")
    common.add_argument("--threads", type=int, default=1, help="worker threads for return-map scans")
    p = argparse.ArgumentParser(prog="planarcycles",
                                description="Limit cycles of planar polynomial vector fields.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS[:-1]:
        sub.add_parser(name, parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("prop", choices=PROPOSITIONS)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    prop = getattr(args, "prop", None)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = resolve_config(load_config(args.config), args.command, prop, args.seed)
        resolve_system(cfg["system"])
    except (ConfigError, ValueError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    _dump(cfg, os.path.join(args.out, "config.json"))
    try:
        if args.command == "verify":
            return cmd_verify(cfg, args.out, prop, args.threads)
        handler = globals()[f"cmd_{args.command}"]
        return handler(cfg, args.out, args.threads)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except CycleLabError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
