"""Command-line interface.

Subcommands: budget, solve-lambda, randomize, estimate, predict-cov,
expand-inverse, verify.  Exit codes: 0 success, 1 usage error, 2 data or
schema error, 3 verification failure.

A run config is a JSON file::

    {"schema": "schema.json",            # relative to the config file
     "lambdas": {"sex": 0.6, "age": 0.7},
     "seed": 20240101,
     "mode": "central",                   # or "local-simulated"
     "caps": {"cells": 10000000, "dense": 512},
     "format": "csv"}
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataError, Schema, read_csv, write_csv
from .estimate import empirical_joint, estimate_marginal, marginal, predict_covariance, project_to_simplex
from .kron import CELL_CAP, JointScheme, format_term, inverse_terms, write_tensor_csv
from .matrix import LambdaMatrix, solve_lambda
from .oracle import ORACLE_CAP
from .randomize import MODES, SeedSpec, randomize_dataset
from .verify import run_checks

EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 1, 2, 3


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    schema: Schema | None = None
    lambdas: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    mode: str = "central"
    cell_cap: int = CELL_CAP
    dense_cap: int = ORACLE_CAP
    fmt: str | None = None

    def scheme(self) -> JointScheme:
        if self.schema is None:
            raise ConfigError("a schema is required (config 'schema' or --sizes)")
        try:
            return self.schema.scheme(self.lambdas)
        except (DataError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def numeric_lambdas(self) -> list[float]:
        return [self.lambdas[a.name] for a in self.schema.numeric]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        path = Path(args.config)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if "schema" in doc:
            schema_doc = doc["schema"]
            if isinstance(schema_doc, str):
                cfg.schema = Schema.from_json(path.parent / schema_doc)
            else:
                cfg.schema = Schema.from_dict(schema_doc)
        lambdas = doc.get("lambdas", {})
        if cfg.schema is not None and lambdas:
            try:
                cfg.lambdas = cfg.schema.lambda_map(lambdas)
            except DataError as exc:
                raise ConfigError(str(exc)) from exc
        cfg.seed = doc.get("seed")
        cfg.mode = doc.get("mode", cfg.mode)
        caps = doc.get("caps", {})
        cfg.cell_cap = int(caps.get("cells", cfg.cell_cap))
        cfg.dense_cap = int(caps.get("dense", cfg.dense_cap))
        cfg.fmt = doc.get("format")
    if getattr(args, "sizes", None):
        sizes = [int(s) for s in _floats(args.sizes)]
        cfg.schema = Schema.from_dict(
            {"attributes": [{"name": f"A{i + 1}", "categories": [str(c) for c in range(n)]} for i, n in enumerate(sizes)]}
        )
        cfg.lambdas = {}
        if not getattr(args, "lambdas", None):
            raise ConfigError("--sizes needs --lambdas")
    if getattr(args, "lambdas", None):
        if cfg.schema is None:
            raise ConfigError("--lambdas needs a schema (--config) or --sizes")
        try:
            cfg.lambdas = cfg.schema.lambda_map(_floats(args.lambdas))
        except DataError as exc:
            raise ConfigError(str(exc)) from exc
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "format", None):
        cfg.fmt = args.format
    if cfg.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {cfg.mode!r}")
    for name, lam in cfg.lambdas.items():
        if not 0.0 < lam <= 1.0:
            raise ConfigError(f"lambda for {name!r} must be in (0, 1], got {lam!r}")
    return cfg


def _pct(x: float, table1: bool) -> str:
    return f"{round(100 * x):d}%" if table1 else f"{100 * x:.1f}%"


def scheme_hash(schema: Schema, lambdas: dict[str, float]) -> str:
    doc = json.dumps({"schema": schema.to_dict(), "lambdas": lambdas}, sort_keys=True)
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()


def budget_report(scheme: JointScheme, names) -> dict:
    rows = []
    for name, f in zip(names, scheme.factors):
        rows.append({"name": name, "categories": f.size, "lambda": f.lam,
                     "bits": f.entropy_rate(), "max_bits": math.log2(f.size), "strength": f.strength()})
    return {
        "attributes": rows,
        "joint": {"bits": scheme.entropy_rate(), "max_bits": scheme.max_entropy(),
                  "strength": scheme.strength(), "truthfulness": scheme.diagonal_truthfulness()},
    }


def cmd_budget(args) -> int:
    cfg = load_config(args)
    scheme = cfg.scheme()
    names = [a.name for a in cfg.schema.categorical]
    report = budget_report(scheme, names)
    if cfg.fmt == "json":
        print(json.dumps(report, indent=2))
        return 0
    width = max(len(n) for n in names + ["attribute"])
    print(f"{'attribute':<{width}}  {'n':>4}  {'lambda':>8}  {'bits':>8}  {'max':>8}  strength")
    for r in report["attributes"]:
        print(f"{r['name']:<{width}}  {r['categories']:>4}  {r['lambda']:>8.4g}  {r['bits']:>8.4f}  "
              f"{r['max_bits']:>8.4f}  {_pct(r['strength'], args.table1)}")
    j = report["joint"]
    print(f"{'joint':<{width}}  {scheme.cells:>4}  {'':>8}  {j['bits']:>8.4f}  {j['max_bits']:>8.4f}  "
          f"{_pct(j['strength'], args.table1)}")
    print(f"record truthfulness (probability a record is unchanged): {j['truthfulness']:.6g}")
    if cfg.schema.numeric:
        print("numeric attributes are not budgeted: their size is the number of individuals")
    return 0


def cmd_solve_lambda(args) -> int:
    try:
        lam = solve_lambda(args.beta, args.categories)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    m = LambdaMatrix(lam, args.categories)
    print(f"lambda = {lam!r}")
    print(f"strength = {m.strength()!r} ({m.entropy_rate():.6f} of {math.log2(args.categories):.6f} bits)")
    return 0


def cmd_predict_cov(args) -> int:
    try:
        print(repr(predict_covariance(args.lambda_a, args.lambda_b, args.cov)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return 0


def cmd_expand_inverse(args) -> int:
    cfg = load_config(args)
    scheme = cfg.scheme()
    terms = inverse_terms(scheme)
    m = len(scheme)
    if cfg.fmt == "json":
        print(json.dumps([{"epsilon": list(t.epsilon), "coefficient": t.coefficient,
                           "term": format_term(scheme, t)} for t in terms], indent=2))
        return 0
    print(f"inverse of the {scheme.cells}x{scheme.cells} joint matrix: 2^{m} = {len(terms)} terms")
    for k in range(m + 1):
        group = [t for t in terms if t.weight == k]
        print(f"[{k} factor{'s' if k != 1 else ''} (I-P*), {len(group)} term{'s' if len(group) != 1 else ''}]")
        for t in group:
            print(f"  {format_term(scheme, t)}    (coefficient {t.coefficient!r})")
    if m <= 4:
        print("sum: " + " + ".join(format_term(scheme, t) for t in reversed(terms)))
    return 0


def _sidecar(path) -> Path:
    return Path(str(path) + ".meta.json")


def cmd_randomize(args) -> int:
    cfg = load_config(args)
    scheme = cfg.scheme()
    if cfg.seed is None:
        raise ConfigError("randomization needs a seed (config 'seed' or --seed)")
    if not args.input or not args.output:
        raise ConfigError("randomize needs --input and --output")
    data = read_csv(args.input, cfg.schema)
    out = randomize_dataset(scheme, data, SeedSpec(cfg.seed), cfg.numeric_lambdas(), mode=cfg.mode)
    write_csv(args.output, out)
    meta = {
        "schema": cfg.schema.to_dict(),
        "lambdas": cfg.lambdas,
        "seed": cfg.seed,
        "mode": cfg.mode,
        "records": len(out),
        "scheme_hash": scheme_hash(cfg.schema, cfg.lambdas),
    }
    _sidecar(args.output).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"randomized {len(out)} records ({cfg.mode}) -> {args.output}", file=sys.stderr)
    return 0


def cmd_estimate(args) -> int:
    if not args.input:
        raise ConfigError("estimate needs --input")
    cfg = load_config(args)
    meta_path = _sidecar(args.input)
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        cfg.schema = Schema.from_dict(meta["schema"])
        cfg.lambdas = cfg.schema.lambda_map(meta["lambdas"])
    elif not cfg.lambdas:
        raise ConfigError(f"no sidecar {meta_path} and no lambdas in the config")
    scheme = cfg.scheme()
    scheme.check_cells(cfg.cell_cap)
    data = read_csv(args.input, cfg.schema)
    names = [a.name for a in cfg.schema.categorical]

    theta = empirical_joint(data.codes, scheme.shape, cap=cfg.cell_cap)
    pi = scheme.apply_inverse(theta)
    columns = {"theta_hat": theta, "pi_hat": pi}
    negative = int((pi < 0).sum())
    if negative:
        print(f"warning: {negative} of {pi.size} estimated cells are negative", file=sys.stderr)
    if args.project_simplex:
        columns["pi_projected"] = project_to_simplex(pi).values

    marginals = {}
    for axis, (attr, f) in enumerate(zip(cfg.schema.categorical, scheme.factors)):
        th = marginal(theta, [axis])
        marginals[attr.name] = {"categories": list(attr.categories), "theta_hat": th.tolist(),
                                "pi_hat": estimate_marginal(f, th).tolist()}

    print(f"{len(data)} records, {pi.size} joint cells, lambdas {list(scheme.lambdas)}")
    for name, m in marginals.items():
        print(f"{name}:")
        for label, th, p in zip(m["categories"], m["theta_hat"], m["pi_hat"]):
            print(f"  {label:<16} observed {th:.6f}  estimated {p:.6f}")

    if args.output:
        if (cfg.fmt or "csv") == "json":
            doc = {"names": names, "shape": list(scheme.shape), "lambdas": list(scheme.lambdas),
                   "negative_cells": negative, "marginals": marginals}
            doc.update({k: [float(v) for v in c.ravel()] for k, c in columns.items()})
            Path(args.output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        else:
            write_tensor_csv(args.output, columns, names)
    return 0


def cmd_verify(args) -> int:
    checks = run_checks(seed=args.seed if args.seed is not None else 0)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if failed else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run config JSON")
    common.add_argument("--format", choices=["csv", "json"], help="output format")

    scheme_opts = argparse.ArgumentParser(add_help=False)
    scheme_opts.add_argument("--lambdas", help="comma-separated lambdas, one per attribute")
    scheme_opts.add_argument("--sizes", help="comma-separated category counts (instead of a schema)")

    parser = _Parser(prog="lambdarr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("budget", parents=[common, scheme_opts], help="entropy budget per attribute and joint")
    p.add_argument("--table1", action="store_true", help="round strengths to whole percents")
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("solve-lambda", help="lambda reaching a target strength")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--categories", type=int, required=True)
    p.set_defaults(func=cmd_solve_lambda)

    p = sub.add_parser("randomize", parents=[common, scheme_opts], help="randomize a CSV dataset")
    p.add_argument("--seed", type=int)
    p.add_argument("--input")
    p.add_argument("--output")
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("estimate", parents=[common, scheme_opts], help="estimate true distributions")
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--project-simplex", action="store_true", help="also emit a clipped, renormalized estimate")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("predict-cov", help="covariance after randomizing two numeric attributes")
    p.add_argument("--lambda-a", type=float, required=True)
    p.add_argument("--lambda-b", type=float, required=True)
    p.add_argument("--cov", type=float, required=True)
    p.set_defaults(func=cmd_predict_cov)

    p = sub.add_parser("expand-inverse", parents=[common, scheme_opts], help="list the closed-form inverse terms")
    p.set_defaults(func=cmd_expand_inverse)

    p = sub.add_parser("verify", help="cross-check closed forms against the dense oracle")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
