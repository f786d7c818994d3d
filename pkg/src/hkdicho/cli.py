"""Command-line front end.

Subcommands::

    validate <spec>                    structural checks only
    verify <spec> [--window N] [--norm max|sum|euclid]
                  [--report out.json] [--csv dir] [--conditions ids]
    example <name> [--window N] [--param key=value ...] [--emit out.json]
    norms <spec>                       tabulate both norm constructions
    barbashin <spec>                   backward-sum estimates
    datko <spec> [--tilde default|table:<path>]

Exit codes: 0 when no selected condition FAILS or DIVERGES, 1 otherwise,
2 for malformed or invalid input.
"""

import argparse
import json
import sys

import numpy as np

from .catalog import EXAMPLES
from .errors import HkdichoError, SpecParseError, SpecValidationError
from .evolution import build_evolution
from .linops import sample_unit_vectors
from .lyapnorms import base_norm_sequence, build_dichotomy_norm, build_growth_norm
from .pipeline import CONDITION_IDS, run_analysis
from .projectors import build_skew_evolution
from .report import (summary_lines, write_certificate, write_condition_csvs)
from .series import barbashin_sums, datko_sums, derive_tilde_rate
from .specfile import example_spec_dict, parse_spec, write_spec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkdicho",
        description="Finite-window dichotomy/growth verification for linear "
                    "discrete-time systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a spec and run structural checks")
    p.add_argument("spec")

    p = sub.add_parser("verify", help="full analysis and certificate")
    p.add_argument("spec")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--norm", choices=("max", "sum", "euclid"), default=None)
    p.add_argument("--report", default=None, help="write the JSON certificate here")
    p.add_argument("--csv", default=None, help="write per-condition CSVs here")
    p.add_argument("--conditions", default=None,
                   help="comma-separated condition ids for the exit code")

    p = sub.add_parser("example", help="emit a spec file for a bundled example")
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--window", type=int, default=32)
    p.add_argument("--norm", choices=("max", "sum", "euclid"), default="max")
    p.add_argument("--param", action="append", default=[],
                   metavar="KEY=VALUE", help="generator parameter override")
    p.add_argument("--emit", default=None, help="output path (default: stdout)")

    p = sub.add_parser("norms", help="tabulate norm-sequence values on samples")
    p.add_argument("spec")
    p.add_argument("--window", type=int, default=None)

    p = sub.add_parser("barbashin", help="backward-sum criterion estimates")
    p.add_argument("spec")
    p.add_argument("--window", type=int, default=None)

    p = sub.add_parser("datko", help="forward-sum criterion estimates")
    p.add_argument("spec")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--tilde", default="default",
                   help="default | table:<path to {values, bound} JSON>")
    return parser


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise SpecValidationError(f"expected KEY=VALUE, got {pair!r}",
                                      "--param")
        key, value = pair.split("=", 1)
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _cmd_validate(args) -> int:
    bundle, config, _ = parse_spec(args.spec)
    from .projectors import check_invariance, check_projectors
    E = build_evolution(bundle.system)
    proj = check_projectors(bundle.projectors, config.tol_projector,
                            bundle.system.norm)
    inv = check_invariance(bundle.projectors, E, config.tol_invariance)
    print(f"spec: {bundle.name} (window={bundle.window}, "
          f"norm={bundle.system.norm}, dim={bundle.system.dim})")
    print(f"projector residual: {proj.max_residual:.3e} "
          f"({'ok' if proj.ok else 'FAIL'})")
    print(f"invariance residual: {inv.max_residual:.3e} "
          f"({'ok' if inv.ok else 'FAIL'})")
    print("rate h/k: validated; divergence untested on a finite window")
    return 0


def _cmd_verify(args) -> int:
    overrides = {}
    if args.conditions:
        ids = tuple(s.strip() for s in args.conditions.split(",") if s.strip())
        unknown = set(ids) - set(CONDITION_IDS)
        if unknown:
            raise SpecValidationError(f"unknown condition ids {sorted(unknown)}",
                                      "--conditions")
        overrides["conditions"] = ids
    bundle, config, _ = parse_spec(args.spec, window=args.window,
                                   norm=args.norm,
                                   config_overrides=overrides)
    cert = run_analysis(bundle, config)
    for line in summary_lines(cert):
        print(line)
    print(f"elapsed: {cert.timing_seconds:.2f}s", file=sys.stderr)
    if args.report:
        write_certificate(cert, args.report)
        print(f"certificate written to {args.report}", file=sys.stderr)
    if args.csv:
        paths = write_condition_csvs(cert, args.csv)
        print(f"{len(paths)} CSV files written to {args.csv}", file=sys.stderr)
    return cert.exit_status


def _cmd_example(args) -> int:
    params = _parse_params(args.param)
    spec = example_spec_dict(args.name, window=args.window, norm=args.norm,
                             **params)
    if args.emit:
        write_spec(spec, args.emit)
        print(f"spec written to {args.emit}")
    else:
        print(json.dumps(spec, indent=2, sort_keys=True))
    return 0


def _prepare(args):
    bundle, config, _ = parse_spec(args.spec, window=args.window)
    E = build_evolution(bundle.system)
    B = build_skew_evolution(bundle.projectors, E, config.tol_sigma_min)
    return bundle, config, E, B


def _cmd_norms(args) -> int:
    bundle, config, E, B = _prepare(args)
    P, h, k = bundle.projectors, bundle.h, bundle.k
    dnorm = build_dichotomy_norm(E, P, B, h, k)
    gnorm = build_growth_norm(E, P, B, h, k)
    d = bundle.system.dim
    vectors = [np.eye(d)[i] for i in range(d)] + [np.ones(d)]
    if d == 2:
        vectors.append(np.array([3.0, 4.0]))
    header = "n  " + "  ".join(f"{'|'.join(str(int(v)) for v in vec):>12}"
                               for vec in vectors)
    print(f"dichotomy-norm and growth-norm values (window={bundle.window})")
    print(header)
    for n in range(bundle.window + 1):
        dvals = " ".join(f"{dnorm.value(n, v):13.6g}" for v in vectors)
        gvals = " ".join(f"{gnorm.value(n, v):13.6g}" for v in vectors)
        print(f"{n:3d} D {dvals}")
        print(f"    G {gvals}")
    return 0


def _cmd_barbashin(args) -> int:
    bundle, config, E, B = _prepare(args)
    P, h, k = bundle.projectors, bundle.h, bundle.k
    dnorm = build_dichotomy_norm(E, P, B, h, k)
    report = barbashin_sums(dnorm, E, P, B, h, k)
    base = base_norm_sequence(bundle.system.dim, bundle.system.norm,
                              bundle.window)
    report_base = barbashin_sums(base, E, P, B, h, k)
    status = 0
    for label, rep in (("dichotomy-norm", report), ("base-norm", report_base)):
        for est in (rep.h_side, rep.k_side):
            verdict = est.base_verdict()
            print(f"{est.condition} [{label}] {verdict} "
                  f"U={est.uniform_constant:.6g}")
            if verdict != "HOLDS-ON-WINDOW":
                status = 1
    return status


def _cmd_datko(args) -> int:
    bundle, config, E, B = _prepare(args)
    P, h, k = bundle.projectors, bundle.h, bundle.k
    if args.tilde.startswith("table:"):
        path = args.tilde.split(":", 1)[1]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                blob = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecParseError(f"cannot read companion table: {exc}") from exc
        tilde = derive_tilde_rate(h, "table", blob.get("values"),
                                  blob.get("bound"))
    elif args.tilde == "default":
        tilde = derive_tilde_rate(h)
    else:
        raise SpecValidationError(f"unknown companion spec {args.tilde!r}",
                                  "--tilde")
    dnorm = build_dichotomy_norm(E, P, B, h, k)
    report = datko_sums(dnorm, tilde, E, P, B, h, k)
    print(f"companion bound H={tilde.bound:.6g}, "
          f"partial sum={tilde.partial_sums[-1]:.6g}")
    status = 0
    for est in (report.h_side, report.k_side, report.h_single,
                report.k_single):
        verdict = est.base_verdict()
        print(f"{est.condition} {verdict} U={est.uniform_constant:.6g}")
        if verdict != "HOLDS-ON-WINDOW":
            status = 1
    return status


_COMMANDS = {
    "validate": _cmd_validate,
    "verify": _cmd_verify,
    "example": _cmd_example,
    "norms": _cmd_norms,
    "barbashin": _cmd_barbashin,
    "datko": _cmd_datko,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SpecParseError, SpecValidationError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except HkdichoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
