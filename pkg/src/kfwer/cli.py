"""Command-line front end: bounds, event inequalities, simulation, data.

Every subcommand emits one document (JSON by default) that embeds a run
manifest -- subcommand, resolved parameters, seed, version, timestamp --
sufficient to reproduce the run.  Outputs are deterministic given the
manifest (modulo the timestamp field itself).  Exit codes: 0 success,
2 validation/usage error, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv as csv_module
import io
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bounds import (
    CorrelationMatrix,
    Equicorrelated,
    TestConfig,
    matrix_bound_report,
    nearly_indep_bound,
    proposed_bound_equicorr,
)
from .event_inequalities import EventMoments, combined_bound
from .genomics import load_expression_matrix, run_procedures, t_to_z, two_sample_t
from .simulation import SimSpec, estimate_kfwer, lr_cutoff, run_table

FORMATS = ("json", "csv", "table")


def _default_threads() -> int:
    env = os.environ.get("KFWER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _manifest(subcommand: str, params: dict, seed=None) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": params,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def _fmt_number(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _emit(document: dict, fmt: str, table_text: str | None = None) -> None:
    if fmt == "json":
        print(json.dumps(document, indent=2, sort_keys=True))
    elif fmt == "csv":
        rows: list = []
        _flatten("", document, rows)
        buf = io.StringIO()
        writer = csv_module.writer(buf)
        writer.writerow(["key", "value"])
        for key, value in rows:
            writer.writerow([key, _fmt_number(value)])
        sys.stdout.write(buf.getvalue())
    else:
        if table_text is not None:
            print(table_text)
        else:
            rows = []
            _flatten("", document, rows)
            key_width = max((len(k) for k, _ in rows), default=0)
            for key, value in rows:
                print(f"{key:<{key_width}}  {_fmt_number(value)}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker-thread cap (env default KFWER_THREADS)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfwer",
        description="Bounds, simulation, and screening for generalized "
                    "familywise error rates under dependence.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    b = sub.add_parser("bounds", help="bound report for one (n, k, alpha, correlation) instance")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--alpha", type=float, required=True)
    b.add_argument("--rho", type=float, default=0.0)
    b.add_argument("--matrix", help="CSV file holding an explicit correlation matrix")
    b.add_argument("--strict-pairs", action="store_true",
                   help="drop pairs involving the last index from the pair sum")
    _add_common(b)

    i = sub.add_parser("ineq", help="combined at-least-k bound from a moment file")
    i.add_argument("--moments", required=True,
                   help="JSON file with n, k, S, S_prime, max_intersections")
    _add_common(i)

    s = sub.add_parser("simulate", help="Monte Carlo k-FWER estimate for one cell")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--reps", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cutoff-mode", choices=("lr", "modified"), default="modified")
    _add_common(s)

    t = sub.add_parser("table1", help="simulation grid over k x rho with bounds")
    t.add_argument("--n", type=int, default=1000)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--reps", type=int, default=10_000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--cutoff-mode", choices=("lr", "modified"), default="modified")
    t.add_argument("--ks", default="25,50,75", help="comma-separated k values")
    t.add_argument("--rhos", default="0.1,0.15,0.2,0.25,0.3", help="comma-separated rho values")
    _add_common(t)

    a = sub.add_parser("analyze", help="two-group expression screen")
    a.add_argument("--data", required=True)
    a.add_argument("--fmt", choices=("csv", "tsv"))
    a.add_argument("--n1", type=int)
    a.add_argument("--n2", type=int)
    a.add_argument("--k-list", default="2,10,20,40,60")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--rho", type=float, default=0.0)
    a.add_argument("--checksum", help="expected sha256 of the data file")
    _add_common(a)

    return parser


def _cmd_bounds(args) -> tuple[dict, str | None]:
    config = TestConfig(args.n, args.k, args.alpha)
    if args.matrix:
        values = np.loadtxt(args.matrix, delimiter=",")
        model = CorrelationMatrix(values)
        report = matrix_bound_report(config, model, strict_pairs=args.strict_pairs)
    else:
        model = Equicorrelated(args.rho)
        report = proposed_bound_equicorr(config, args.rho, strict_pairs=args.strict_pairs)
    doc = report.to_dict()
    doc["nearly_indep_bound"] = nearly_indep_bound(config, model, report.alpha_star_search)
    doc["manifest"] = _manifest("bounds", {
        "n": args.n, "k": args.k, "alpha": args.alpha,
        "rho": None if args.matrix else args.rho,
        "matrix": args.matrix, "strict_pairs": args.strict_pairs,
    })
    return doc, None


def _cmd_ineq(args) -> tuple[dict, str | None]:
    with open(args.moments) as fh:
        raw = json.load(fh)
    aliases = {"S": "S", "Sprime": "S_prime", "S_prime": "S_prime",
               "maxInter": "max_intersections", "max_intersections": "max_intersections"}
    fields: dict = {"n": raw["n"], "k": raw["k"]}
    for key, canonical in aliases.items():
        if key in raw:
            fields[canonical] = tuple(float(v) for v in raw[key])
    try:
        moments = EventMoments(
            n=int(fields["n"]), k=int(fields["k"]), S=tuple(fields["S"]),
            S_prime=tuple(fields["S_prime"]),
            max_intersections=tuple(fields["max_intersections"]),
        )
    except KeyError as exc:
        raise ValueError(f"moments file is missing field {exc}") from exc
    doc = combined_bound(moments).to_dict()
    doc["n"] = moments.n
    doc["k"] = moments.k
    doc["manifest"] = _manifest("ineq", {"moments": args.moments})
    return doc, None


def _cmd_simulate(args) -> tuple[dict, str | None]:
    config = TestConfig(args.n, args.k, args.alpha)
    if args.cutoff_mode == "lr":
        cutoff = lr_cutoff(config)
        alpha_star = None
    else:
        report = proposed_bound_equicorr(config, args.rho)
        alpha_star = report.alpha_star_search
        cutoff = lr_cutoff(config, alpha_star)
    spec = SimSpec(config=config, rho=args.rho, cutoff=cutoff, reps=args.reps, seed=args.seed)
    result = estimate_kfwer(spec, threads=args.threads)
    doc = result.to_dict()
    doc["cutoff"] = cutoff
    doc["cutoff_mode"] = args.cutoff_mode
    doc["alpha_star"] = alpha_star
    doc["manifest"] = _manifest("simulate", {
        "n": args.n, "k": args.k, "rho": args.rho, "alpha": args.alpha,
        "reps": args.reps, "cutoff_mode": args.cutoff_mode,
    }, seed=args.seed)
    return doc, None


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _cmd_table1(args) -> tuple[dict, str | None]:
    result = run_table(
        alpha=args.alpha, reps=args.reps, seed=args.seed, n=args.n,
        ks=_parse_ints(args.ks), rhos=_parse_floats(args.rhos),
        cutoff_mode=args.cutoff_mode, threads=args.threads,
    )
    doc = result.to_dict()
    doc["manifest"] = _manifest("table1", {
        "n": args.n, "alpha": args.alpha, "reps": args.reps,
        "ks": list(result.ks), "rhos": list(result.rhos),
        "cutoff_mode": args.cutoff_mode,
    }, seed=args.seed)
    return doc, result.format_table()


def _cmd_analyze(args) -> tuple[dict, str | None]:
    group_sizes = None
    if (args.n1 is None) != (args.n2 is None):
        raise ValueError("--n1 and --n2 must be given together")
    if args.n1 is not None:
        group_sizes = (args.n1, args.n2)
    dataset = load_expression_matrix(
        args.data, fmt=args.fmt, group_sizes=group_sizes, checksum=args.checksum
    )
    stats = t_to_z(two_sample_t(dataset))
    table = run_procedures(stats, _parse_ints(args.k_list), alpha=args.alpha, rho=args.rho)
    doc = table.to_dict()
    doc["group_sizes"] = list(dataset.group_sizes)
    doc["manifest"] = _manifest("analyze", {
        "data": args.data, "fmt": args.fmt, "n1": dataset.group_sizes[0],
        "n2": dataset.group_sizes[1], "k_list": list(_parse_ints(args.k_list)),
        "alpha": args.alpha, "rho": args.rho, "checksum": args.checksum,
    })
    return doc, table.format_table()


_COMMANDS = {
    "bounds": _cmd_bounds,
    "ineq": _cmd_ineq,
    "simulate": _cmd_simulate,
    "table1": _cmd_table1,
    "analyze": _cmd_analyze,
}


def dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        document, table_text = _COMMANDS[args.subcommand](args)
    except (ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    _emit(document, args.format, table_text)
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
