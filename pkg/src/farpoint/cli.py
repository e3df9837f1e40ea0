"""Command-line front end: instance files in, reports and exit codes out.

Three subcommands map onto the three drivers:

* ``farpoint farthest FILE``    -- maximize ||x - C||^2 over a ball list
* ``farpoint subset-sum FILE``  -- YES/NO/INCONCLUSIVE for a zero-sum subset
* ``farpoint validate FILE``    -- construction identities and inclusion checks

Instances are JSON objects with a ``kind`` discriminator (``balls``,
``subset_sum``, ``coaxial``).  Every run prints human-readable lines
followed by a single structured JSON record (sorted keys, seed included)
so harnesses can parse the last line; identical input and seed give a
byte-identical record.

Exit codes: 0 success (including a certified NO), 1 I/O or schema error,
2 precondition failure, 3 inconclusive or failed validation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields, replace

import numpy as np

from .geometry import Ball, FrameworkConfig, InstanceError
from .maximize import CaseLabel, PreconditionError, farthest_point
from .oracles import (CoaxialDiskFamily, brute_force_subset_sum,
                      inclusion_sampler, sample_farthest)
from .subset_sum import (SubsetSumInstance, build_disk_cover,
                         corner_exactness_check, cover_parameters,
                         decide_subset_sum, scaled_polytope_equivalence)

EXIT_OK = 0
EXIT_IO = 1
EXIT_PRECONDITION = 2
EXIT_INCONCLUSIVE = 3

_CONFIG_KEYS = {f.name for f in fields(FrameworkConfig)}

_METHOD_CASE = {
    "singleton": CaseLabel.ON_BOUNDARY.value,
    "boundary": CaseLabel.ON_BOUNDARY.value,
    "bisection": CaseLabel.DISJOINT_FROM_INTERIOR.value,
    "inclusion": CaseLabel.STRICTLY_INTERIOR.value,
}


class CliError(Exception):
    """Carries a message and the exit code to report it with."""

    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


def _fail(message: str, code: int = EXIT_IO) -> CliError:
    return CliError(message, code)


def _require_number(payload: dict, field: str, *, positive: bool = False):
    if field not in payload:
        raise _fail(f"missing field '{field}'")
    value = payload[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _fail(f"field '{field}' must be a number, got {value!r}")
    if positive and value <= 0:
        raise _fail(f"field '{field}' must be positive, got {value}")
    return float(value)


def _require_vector(payload: dict, field: str, length=None) -> list:
    if field not in payload:
        raise _fail(f"missing field '{field}'")
    value = payload[field]
    if (not isinstance(value, list) or not value
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in value)):
        raise _fail(f"field '{field}' must be a nonempty list of numbers")
    if length is not None and len(value) != length:
        raise _fail(f"field '{field}' must have length {length}, "
                    f"got {len(value)}")
    return [float(v) for v in value]


def _check_fields(payload: dict, allowed: set, context: str) -> None:
    unknown = sorted(set(payload) - allowed)
    if unknown:
        raise _fail(f"unknown field(s) in {context}: {', '.join(unknown)}")


def load_instance(path: str) -> dict:
    """Parse and schema-validate an instance file; returns the payload dict."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _fail(f"cannot read {path}: {exc}")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(f"{path}: invalid JSON at line {exc.lineno}, "
                    f"column {exc.colno}: {exc.msg}")
    if not isinstance(payload, dict):
        raise _fail(f"{path}: top level must be an object")
    kind = payload.get("kind")
    if kind not in ("balls", "subset_sum", "coaxial"):
        raise _fail(f"{path}: field 'kind' must be one of balls, subset_sum, "
                    f"coaxial; got {kind!r}")

    config = payload.get("config", {})
    if not isinstance(config, dict):
        raise _fail("field 'config' must be an object")
    _check_fields(config, _CONFIG_KEYS, "'config'")

    if kind == "balls":
        _check_fields(payload, {"kind", "dimension", "balls", "query",
                                "config"}, "balls instance")
        dim = payload.get("dimension")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise _fail("field 'dimension' must be a positive integer")
        entries = payload.get("balls")
        if not isinstance(entries, list) or not entries:
            raise _fail("field 'balls' must be a nonempty list")
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict):
                raise _fail(f"balls[{i}] must be an object")
            _check_fields(entry, {"center", "radius"}, f"balls[{i}]")
            _require_vector(entry, "center", dim)
            if "radius" not in entry:
                raise _fail(f"missing field 'balls[{i}].radius'")
            if _require_number(entry, "radius") < 0:
                raise _fail(f"field 'balls[{i}].radius' must be nonnegative")
        _require_vector(payload, "query", dim)
    elif kind == "subset_sum":
        _check_fields(payload, {"kind", "S", "rho", "beta", "alpha",
                                "config"}, "subset_sum instance")
        _require_vector(payload, "S")
        for name in ("rho", "beta", "alpha"):
            if name in payload:
                _require_number(payload, name, positive=True)
    else:
        _check_fields(payload, {"kind", "a", "q", "dimension", "config"},
                      "coaxial instance")
        _require_number(payload, "a", positive=True)
        _require_vector(payload, "q", 3)
        dim = payload.get("dimension")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise _fail("field 'dimension' must be a positive integer")
    return payload


def _resolve_config(payload: dict, args) -> FrameworkConfig:
    cfg = FrameworkConfig()
    overrides = payload.get("config", {})
    if overrides:
        try:
            cfg = replace(cfg, **overrides)
        except (TypeError, InstanceError) as exc:
            raise _fail(f"invalid config override: {exc}")
    flag_overrides = {}
    if getattr(args, "tol_bisection", None) is not None:
        flag_overrides["tol_bisection"] = args.tol_bisection
    if getattr(args, "tol_solver", None) is not None:
        flag_overrides["tol_solver"] = args.tol_solver
    if flag_overrides:
        try:
            cfg = replace(cfg, **flag_overrides)
        except InstanceError as exc:
            raise _fail(f"invalid tolerance flag: {exc}")
    return cfg


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("SOLVER_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _fail(f"SOLVER_SEED must be an integer, got {env!r}")
    return 0


def _config_record(cfg: FrameworkConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(FrameworkConfig)}


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


def cmd_farthest(args) -> int:
    payload = load_instance(args.path)
    if payload["kind"] != "balls":
        raise _fail(f"farthest expects kind 'balls', got '{payload['kind']}'")
    cfg = _resolve_config(payload, args)
    seed = _resolve_seed(args)
    balls = [Ball(np.array(entry["center"], dtype=float),
                  float(entry["radius"])) for entry in payload["balls"]]
    C = np.array(payload["query"], dtype=float)
    record = {"command": "farthest", "kind": "balls", "seed": seed,
              "config": _config_record(cfg), "instance": {
                  "dimension": payload["dimension"],
                  "balls": [{"center": list(b.center), "radius": b.radius}
                            for b in balls],
                  "query": list(C)}}
    try:
        rep = farthest_point(balls, C, cfg)
    except PreconditionError as exc:
        print(f"precondition failure: {exc}")
        record.update({"error": str(exc), "status": "precondition"})
        _emit(record)
        return EXIT_PRECONDITION
    except InstanceError as exc:
        print(f"instance rejected: {exc}")
        record.update({"error": str(exc), "status": "precondition"})
        _emit(record)
        return EXIT_PRECONDITION

    case = _METHOD_CASE.get(rep.method, rep.method)
    print(f"farthest-point value: {rep.value:.9f}")
    print(f"maximizer: {np.array2string(rep.minimizer, precision=9)}")
    print(f"case: {case}   branch: {rep.method}")
    record.update({"status": "ok", "value": rep.value,
                   "maximizer": [float(v) for v in rep.minimizer],
                   "case": case, "branch": rep.method,
                   "iterations": rep.iterations})
    if args.oracle:
        oracle_val, _ = sample_farthest(balls, C, args.samples, seed=seed)
        gap = rep.value - oracle_val
        print(f"oracle (sampled, {args.samples} draws): {oracle_val:.9f}   "
              f"gap: {gap:+.3e}")
        record.update({"oracle_value": oracle_val, "oracle_gap": gap,
                       "oracle_samples": args.samples})
    _emit(record)
    return EXIT_OK


def cmd_subset_sum(args) -> int:
    payload = load_instance(args.path)
    if payload["kind"] != "subset_sum":
        raise _fail(f"subset-sum expects kind 'subset_sum', "
                    f"got '{payload['kind']}'")
    cfg = _resolve_config(payload, args)
    seed = _resolve_seed(args)
    inst = SubsetSumInstance(np.array(payload["S"], dtype=float))
    record = {"command": "subset-sum", "kind": "subset_sum", "seed": seed,
              "config": _config_record(cfg),
              "instance": {"S": [float(v) for v in inst.S]}}
    kwargs = {}
    if "rho" in payload:
        kwargs["rho"] = payload["rho"]
    if "beta" in payload:
        kwargs["beta"] = payload["beta"]
    if "alpha" in payload:
        kwargs["alpha_check"] = payload["alpha"]
    try:
        rep = decide_subset_sum(inst, cfg, **kwargs)
    except InstanceError as exc:
        print(f"construction failed: {exc}")
        record.update({"status": "construction-failed", "error": str(exc)})
        _emit(record)
        return EXIT_INCONCLUSIVE

    witness = list(rep.witness_subset) if rep.witness_subset else None
    print(f"answer: {rep.answer}")
    if witness:
        print(f"witness indices (1-based): {witness}")
    print(f"branch: {rep.branch}   residual: {rep.residual:.3e}")
    print(f"parameters: {rep.diagnostics}")
    record.update({"status": "ok", "answer": rep.answer, "witness": witness,
                   "branch": rep.branch, "residual": rep.residual,
                   "diagnostics": rep.diagnostics})

    code = EXIT_OK if rep.answer in ("YES", "NO") else EXIT_INCONCLUSIVE
    if args.brute_force:
        if inst.n <= 24:
            truth, witnesses = brute_force_subset_sum(inst)
            agree = rep.answer == "INCONCLUSIVE" or rep.answer == truth
            line = ("brute-force agrees: " + truth if agree and
                    rep.answer == truth else
                    f"brute-force: {truth} (decision {rep.answer})")
            print(line)
            record.update({"brute_force": truth, "brute_force_agrees": agree})
            if not agree:
                print("MISMATCH: decision contradicts enumeration")
                code = EXIT_INCONCLUSIVE
        else:
            print(f"brute force skipped (n = {inst.n} > 24)")
            record.update({"brute_force": None})
    _emit(record)
    return code


def cmd_validate(args) -> int:
    payload = load_instance(args.path)
    cfg = _resolve_config(payload, args)
    seed = _resolve_seed(args)
    kind = payload["kind"]
    record = {"command": "validate", "kind": kind, "seed": seed,
              "config": _config_record(cfg), "checks": []}
    ok = True

    if kind == "subset_sum":
        inst = SubsetSumInstance(np.array(payload["S"], dtype=float))
        record["instance"] = {"S": [float(v) for v in inst.S]}
        rho, beta, rho_bar = cover_parameters(inst, payload.get("rho"),
                                              payload.get("beta"))
        record.update({"rho": rho, "beta": beta, "rho_bar": rho_bar})
        cover = build_disk_cover(inst, rho, beta, 1.0)
        if inst.n <= 20:
            err = corner_exactness_check(cover, inst)
            passed = err <= 1e-9
            ok &= passed
            print(f"corner exactness: max residual {err:.3e}  "
                  f"{'pass' if passed else 'FAIL'}")
            record["checks"].append({"name": "corner_exactness",
                                     "residual": err, "pass": passed})
        else:
            print(f"corner exactness skipped (n = {inst.n} > 20)")
        R = float(np.linalg.norm(cover.C_query))
        alphas = ([1.0 + i * (1.0 / max(args.alpha_grid - 1, 1))
                   for i in range(args.alpha_grid)]
                  if args.alpha_grid else [payload.get("alpha", 1.5)])
        for alpha in alphas:
            theta = scaled_polytope_equivalence(inst, rho, beta, alpha, R)
            passed = theta <= 1e-9
            ok &= passed
            print(f"scaling identity at alpha = {alpha:.4f}: residual "
                  f"{theta:.3e}  {'pass' if passed else 'FAIL'}")
            record["checks"].append({"name": "scaling_identity",
                                     "alpha": alpha, "residual": theta,
                                     "pass": passed})
    elif kind == "coaxial":
        family = CoaxialDiskFamily(
            tuple(payload["q"]), payload["a"],
            np.eye(payload["dimension"])[0])
        record["instance"] = {"a": family.shared_radius,
                              "q": list(family.offsets),
                              "dimension": family.dim}
        violations = inclusion_sampler(family, args.samples, seed=seed)
        passed = violations == 0
        ok &= passed
        print(f"inclusion sampling ({args.samples} draws): "
              f"{violations} violations  {'pass' if passed else 'FAIL'}")
        record["checks"].append({"name": "inclusion_sampler",
                                 "violations": violations, "pass": passed})
    else:
        raise _fail("validate supports kinds subset_sum and coaxial; "
                    "kind 'balls' has no construction identities to check")

    print("validation: " + ("pass" if ok else "FAIL"))
    record["pass"] = ok
    _emit(record)
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="farpoint",
        description="Farthest-point and zero-sum-subset drivers over "
                    "intersections of balls.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("path", help="instance file (JSON)")
        p.add_argument("--tol-bisection", type=float, default=None,
                       help="bisection tolerance (default from config)")
        p.add_argument("--tol-solver", type=float, default=None,
                       help="inner solver tolerance (default from config)")
        p.add_argument("--seed", type=int, default=None,
                       help="sampling seed (overrides SOLVER_SEED)")

    p = sub.add_parser("farthest", help="maximize ||x - C||^2 over balls")
    common(p)
    p.add_argument("--oracle", action="store_true",
                   help="append a sampled cross-check")
    p.add_argument("--samples", type=int, default=200_000,
                   help="oracle sample count")

    p = sub.add_parser("subset-sum", help="decide zero-sum subset existence")
    common(p)
    p.add_argument("--brute-force", action="store_true",
                   help="cross-check against enumeration (n <= 24)")

    p = sub.add_parser("validate", help="check construction identities")
    common(p)
    p.add_argument("--alpha-grid", type=int, default=0, metavar="N",
                   help="check the scaling identity on N alphas in [1, 2]")
    p.add_argument("--samples", type=int, default=100_000,
                   help="inclusion sampler draw count")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"farthest": cmd_farthest, "subset-sum": cmd_subset_sum,
                "validate": cmd_validate}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InstanceError as exc:
        print(f"error: invalid instance: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
