"""Command line: describe, check, integrate, legendre and report.

Exit status is 0 when everything passes, 1 when a check fails and 2 for
usage, configuration or input errors.
"""

import argparse
import json
import sys

import numpy as np

from .catalog import KINDS, SpaceError, build_space
from .config import Config, ConfigError, load_config
from .dynamics import CHAINS, TOY_P0, TOY_X0, DynamicsError, integrate_hj
from .expr import ExprError
from .fields import homogeneity_degree
from .jetpoint import make_rng
from .metric import reducibility_probe, signature
from .suites import SCHEMA, SUITES, dumps, format_table, report_document, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _vector(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers separated by commas, got {text!r}") from None


def _space_options(p):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--space", choices=KINDS, help="catalog space (overrides the configuration)")
    p.add_argument("--n", type=int, help="base dimension")
    p.add_argument("--k", type=int, help="jet order")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="builder parameter, repeatable")
    p.add_argument("--seed", type=int, help="random seed")


def build_parser():
    parser = argparse.ArgumentParser(prog="dualjet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="summarize a space")
    _space_options(p)

    p = sub.add_parser("check", help="run verification suites")
    _space_options(p)
    p.add_argument("--suite", choices=SUITES + ("all",))
    p.add_argument("--points", type=int, help="points per check (default: per check)")
    p.add_argument("--json", dest="json_out", metavar="FILE", help="write the JSON report here ('-' for stdout)")

    p = sub.add_parser("integrate", help="integrate the Hamilton-Jacobi system and write a CSV")
    _space_options(p)
    p.add_argument("--t1", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--x0", type=_vector)
    p.add_argument("--p0", type=_vector)
    p.add_argument("--chain", choices=CHAINS)
    p.add_argument("--out", help="CSV file (default stdout)")

    p = sub.add_parser("legendre", help="run the Legendre round trips")
    _space_options(p)
    p.add_argument("--points", type=int)
    p.add_argument("--json", dest="json_out", metavar="FILE")

    p = sub.add_parser("report", help="merge JSON reports into one document")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", help="output file (default stdout)")
    return parser


def _config(args):
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    if args.space:
        if cfg.kind is not None and cfg.kind != args.space:
            cfg.params = {}
        cfg.kind = args.space
    if cfg.kind is None:
        raise UsageError("no space given; use --space or a [space] section")
    if args.n is not None:
        cfg.n = args.n
    if args.k is not None:
        cfg.k = args.k
    for key, value in args.param:
        cfg.params[key] = value
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _space(cfg):
    try:
        return build_space(cfg.kind, cfg.n, cfg.k, **cfg.params)
    except (SpaceError, ExprError, ValueError) as exc:
        raise UsageError(f"cannot build {cfg.kind}: {exc}") from None


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_describe(args, out):
    cfg = _config(args)
    space = _space(cfg)
    shape = space.shape
    u = space.sample(make_rng(cfg.seed), 1)[0]
    pair = space.gfield.pair(u)
    pos, neg = signature(pair.gUp)
    print(f"space: {space.kind}  n = {shape.n}  k = {shape.k}  dim = {shape.dim}", file=out)
    print(f"blocks: {' '.join(shape.block_names())}", file=out)
    print(f"parameters: {', '.join(f'{key}={v}' for key, v in sorted(space.params.items())) or 'none'}",
          file=out)
    if space.H is not None:
        print(f"hamiltonian: {space.H.name}", file=out)
    else:
        print("hamiltonian: none (generalized metric only)", file=out)
    print(f"signature of g^ij: ({pos}, {neg})  condition number {pair.cond:.3g}", file=out)
    target = space.extras.get("K", space.H)
    if target is not None:
        for kind in ("p", "y", "combined"):
            deg = homogeneity_degree(target, u, kind)
            if not isinstance(deg, str) and abs(deg - round(deg)) <= 1e-9:
                deg = int(round(deg)) + 0
            verdict = deg if isinstance(deg, str) else f"degree {deg:.6g}"
            print(f"homogeneity ({kind}) of {target.name}: {verdict}", file=out)
    probe = reducibility_probe(space.gfield, u)
    if probe["reducible"]:
        print(f"C^ijh totally symmetric (defect {probe['defect']:.2e}): reducible to a Hamilton space",
              file=out)
    else:
        print(f"C^ijh not totally symmetric (defect {probe['defect']:.2e}): "
              "not reducible to a Hamilton space", file=out)
    return EXIT_OK


def _emit(args, space, suite, cfg, points, out):
    rows = run_suite(space, suite, cfg.seed, points)
    doc = report_document(space, suite, cfg.seed, rows, points)
    if args.json_out == "-":
        sys.stdout.write(dumps(doc))
    else:
        print(format_table(rows), file=out)
        print(f"{sum(r.passed for r in rows)}/{len(rows)} checks passed", file=out)
        if args.json_out:
            _write(args.json_out, dumps(doc))
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_check(args, out):
    cfg = _config(args)
    suite = args.suite or cfg.suite
    points = args.points if args.points is not None else cfg.points
    return _emit(args, _space(cfg), suite, cfg, points, out)


def cmd_legendre(args, out):
    cfg = _config(args)
    space = _space(cfg)
    if space.H is None and space.lagrangian is None:
        raise UsageError(f"{space.kind} has neither a Hamiltonian nor a Lagrangian")
    points = args.points if args.points is not None else cfg.points
    return _emit(args, space, "legendre", cfg, points, out)


def cmd_integrate(args, out):
    cfg = _config(args)
    space = _space(cfg)
    if space.H is None:
        raise UsageError(f"{space.kind} has no Hamiltonian to integrate")
    opts = dict(cfg.integrate)
    for key in ("t1", "step", "x0", "p0", "chain"):
        if getattr(args, key) is not None:
            opts[key] = getattr(args, key)
    n = space.shape.n
    t1 = opts.get("t1", 1.0)
    step = opts.get("step", 1e-3)
    if not (t1 > 0 and step > 0):
        raise UsageError("t1 and step must be positive")
    x0 = np.asarray(opts.get("x0", TOY_X0 if n == 2 else np.full(n, 0.5)), dtype=float)
    p0 = np.asarray(opts.get("p0", TOY_P0 if n == 2 else np.full(n, 0.5)), dtype=float)
    if x0.shape != (n,) or p0.shape != (n,):
        raise UsageError(f"x0 and p0 need {n} entries")
    try:
        tr = integrate_hj(space.H, x0, p0, t1, step, opts.get("chain", "full"))
    except DynamicsError as exc:
        raise UsageError(str(exc)) from None
    if args.out in (None, "-"):
        tr.to_csv(sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            tr.to_csv(fh)
    print(f"{len(tr.t)} samples, energy drift {tr.report.drift:.3e}", file=sys.stderr)
    if not tr.complete:
        print(f"integration stopped at step {tr.failure_index}: {tr.failure}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(args, out):
    docs = []
    for path in args.files:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"{path}: cannot read report: {exc}") from None
        if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
            raise UsageError(f"{path}: not a {SCHEMA} document")
        docs.append(doc)
    docs.sort(key=lambda d: (d["space"]["kind"], d["suite"], d["seed"]))
    merged = {"schema": SCHEMA, "reports": docs,
              "rows": sum(len(d["rows"]) for d in docs),
              "failed": sum(not r["passed"] for d in docs for r in d["rows"]),
              "passed": all(d["passed"] for d in docs)}
    _write(args.out, dumps(merged))
    return EXIT_OK if merged["passed"] else EXIT_FAIL


COMMANDS = {"describe": cmd_describe, "check": cmd_check, "integrate": cmd_integrate,
            "legendre": cmd_legendre, "report": cmd_report}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    # human-readable output goes to stderr when JSON or CSV occupies stdout
    to_stdout = getattr(args, "json_out", None) == "-" or (args.command == "integrate"
                                                          and args.out in (None, "-"))
    out = sys.stderr if to_stdout else sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ConfigError) as exc:
        print(f"dualjet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
