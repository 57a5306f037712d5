"""Command-line front end.

Two subcommands:

* ``iptree eval`` loads a model and runs queries (from a query file or
  inline flags), printing one report with every value and iterate history.
* ``iptree check`` runs verification batteries against a model: ``axioms``
  (coherence and global-model identity suites), ``oracle`` (brute-force
  envelope against the recursion engine), or ``cert`` (validate a
  supermartingale certificate file against an expression).

Reports are JSON by default (``--pretty`` renders a table derived from the
same JSON).  All numerics are finite numbers or the strings ``"+inf"`` /
``"-inf"``; NaN is never emitted.  Identical inputs and ``--seed`` produce
byte-identical reports; ``--timing`` adds wall-clock fields and is therefore
off by default.

Flags can be supplied through ``IPTREE_``-prefixed environment variables
(``IPTREE_MODEL``, ``IPTREE_SEED``, ``IPTREE_TOL``, ``IPTREE_MAX_HORIZON``,
``IPTREE_FORMAT``, ``IPTREE_PARALLEL``); explicit flags win.  Per-query
``policy`` objects in a query file override the flags.

Exit codes: 0 success (and all checks passed), 1 a check ran and found
violations, 2 any input or query error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .engine import Policy, finitary_lower, finitary_upper, limit_lower, limit_upper
from .errors import IptreeError
from .expr import compile_gamble, parse_gamble
from .extreal import fmt
from .gambles import hitting_event_variable, hitting_time_variable
from .modelio import (
    SCHEMA_VERSION,
    load_certificate,
    load_certificate_file,
    load_model_file,
    load_queries_file,
)
from .oracle import ORACLE_TOL
from .supermartingale import certified_upper_bound
from .suites import model_axiom_suites, model_oracle_suite
from .tree import format_situation, parse_situation

_ENV_PREFIX = "IPTREE_"


def _env(name: str, fallback=None):
    return os.environ.get(_ENV_PREFIX + name.upper(), fallback)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iptree",
        description="Upper/lower expectations for imprecise probability trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", default=_env("model"), help="model JSON file")
        p.add_argument("--seed", type=int, default=int(_env("seed", 0)), help="seed for randomized suites")
        p.add_argument("--tol", type=float, default=float(_env("tol", 1e-9)), help="convergence tolerance")
        p.add_argument(
            "--max-horizon", type=int, default=int(_env("max_horizon", 100)),
            help="iteration cap for limit queries",
        )
        fmt_group = p.add_mutually_exclusive_group()
        fmt_group.add_argument(
            "--json", dest="format", action="store_const", const="json",
            help="machine-readable report (default)",
        )
        fmt_group.add_argument(
            "--pretty", dest="format", action="store_const", const="pretty",
            help="human-readable table derived from the JSON report",
        )
        p.set_defaults(format=_env("format", "json"))
        p.add_argument("--timing", action="store_true", help="include wall-clock fields (breaks byte-identical reports)")

    p_eval = sub.add_parser("eval", help="evaluate queries against a model")
    common(p_eval)
    p_eval.add_argument("--query", help="query JSON file")
    p_eval.add_argument("--expr", help="inline gamble expression")
    p_eval.add_argument("--at", default="", help="conditioning situation, comma-joined labels")
    p_eval.add_argument("--hit-time", metavar="STATES", help="inline hitting-time query, comma-joined target labels")
    p_eval.add_argument("--hit-prob", metavar="STATES", help="inline hitting-probability query")
    p_eval.add_argument(
        "--parallel", action="store_true", default=bool(_env("parallel")),
        help="run independent queries concurrently",
    )

    p_check = sub.add_parser("check", help="run verification batteries")
    common(p_check)
    p_check.add_argument("what", choices=("axioms", "oracle", "cert"))
    p_check.add_argument("target", nargs="?", help="certificate file (cert mode)")
    p_check.add_argument("--expr", help="gamble expression the certificate covers (cert mode)")
    p_check.add_argument("--at", default="", help="conditioning situation (cert mode)")
    p_check.add_argument("--trials", type=int, default=50, help="trials per randomized suite")
    p_check.add_argument("--depth", type=int, default=3, help="gamble depth for the oracle battery")
    return parser


def _policy_from(args, overrides: dict) -> Policy:
    return Policy(
        tol=float(overrides.get("tol", args.tol)),
        max_horizon=int(overrides.get("max_horizon", args.max_horizon)),
        divergence_threshold=float(overrides.get("divergence_threshold", 1e12)),
    )


def _run_query(tree, query: dict, args) -> dict:
    space = tree.state_space
    kind = query["kind"]
    policy = _policy_from(args, query.get("policy", {}))
    s = parse_situation(space, query.get("condition", ""))
    record: dict = {"query": query, "ok": True}
    if kind in ("eval", "lower"):
        expr = parse_gamble(query["expression"], space)
        cap = int(query.get("policy", {}).get("table_cap", 4096))
        f = compile_gamble(expr, cap=cap)
        if kind == "eval":
            record["upper"] = fmt(finitary_upper(tree, f, s))
        record["lower"] = fmt(finitary_lower(tree, f, s))
        record["depth"] = f.depth
    elif kind in ("hit_time", "hit_prob"):
        make = hitting_time_variable if kind == "hit_time" else hitting_event_variable
        variable = make(space, query["targets"])
        upper = limit_upper(tree, variable, s, policy)
        lower = limit_lower(tree, variable, s, policy)
        record["upper"] = upper.to_json()
        record["lower"] = lower.to_json()
        record["converged"] = upper.converged and lower.converged
    elif kind == "verify_cert":
        cert_src = query["certificate"]
        if isinstance(cert_src, str):
            process, declared = load_certificate_file(cert_src, space)
        else:
            process, declared = load_certificate(cert_src, space, path="certificate")
        expr = parse_gamble(query["expression"], space)
        f = compile_gamble(expr)
        cert = certified_upper_bound(process, f, tree, s)
        record.update(_certificate_json(cert, space, declared))
        record["ok"] = True
        record["passed"] = cert.valid
    elif kind == "oracle_check":
        pol = query.get("policy", {})
        report = model_oracle_suite(
            tree,
            seed=query.get("seed", args.seed),
            trials=int(pol.get("trials", 50)),
            depth=int(pol.get("depth", 3)),
            cap=int(pol.get("enum_cap", 200_000)),
        )
        record["suite"] = report.to_json()
        record["passed"] = report.passed
    elif kind == "axiom_suite":
        pol = query.get("policy", {})
        reports = model_axiom_suites(tree, seed=query.get("seed", args.seed), trials=int(pol.get("trials", 50)))
        record["suites"] = [r.to_json() for r in reports]
        record["passed"] = all(r.passed for r in reports)
    else:
        raise IptreeError(f"unhandled query kind {kind!r}")
    return record


def _certificate_json(cert, space, declared_bound=None) -> dict:
    out = {
        "valid": cert.valid,
        "bound": fmt(cert.bound),
        "engine_value": fmt(cert.engine_value),
        "gap": fmt(cert.gap),
        "situation": format_situation(space, cert.situation),
        "verification": {
            "passed": cert.verification.passed,
            "checked": cert.verification.checked,
            "min_margin": fmt(cert.verification.min_margin),
            "max_margin": fmt(cert.verification.max_margin),
            "violations": [
                {
                    "situation": format_situation(space, v.situation),
                    "value": fmt(v.value),
                    "required": fmt(v.required),
                }
                for v in cert.verification.violations
            ],
        },
        "domination_witnesses": [
            format_situation(space, w) for w in cert.domination_witnesses
        ],
    }
    if declared_bound is not None:
        out["declared_lower_bound"] = fmt(declared_bound)
    return out


def _render_pretty(report: dict) -> str:
    lines = [f"iptree {report['command']} report (schema {report['schema']})"]
    if "model" in report:
        lines.append(f"model: {report['model']}")
    for i, rec in enumerate(report.get("results", [])):
        q = rec.get("query", {})
        head = f"[{i}] {q.get('kind', '?')}"
        if "expression" in q:
            head += f"  {q['expression']!r}"
        if "targets" in q:
            head += f"  targets={','.join(q['targets'])}"
        if q.get("condition"):
            head += f"  given {q['condition']!r}"
        lines.append(head)
        for key in ("upper", "lower"):
            if key in rec:
                value = rec[key]
                if isinstance(value, dict):
                    lines.append(
                        f"    {key} = {value['value']}  ({value['stop_reason']},"
                        f" {len(value['iterates'])} iterates)"
                    )
                else:
                    lines.append(f"    {key} = {value}")
        if "passed" in rec:
            lines.append(f"    passed = {rec['passed']}")
        if "valid" in rec:
            lines.append(f"    valid = {rec['valid']}, bound = {rec['bound']}, gap = {rec['gap']}")
    for suite in report.get("suites", []):
        status = "pass" if suite["passed"] else "FAIL"
        lines.append(f"suite {suite['name']}: {status} ({suite['checks']} checks)")
        for failure in suite["failures"][:5]:
            lines.append(f"    {failure}")
    if "certificate" in report:
        c = report["certificate"]
        lines.append(f"certificate valid={c['valid']} bound={c['bound']} engine={c['engine_value']}")
    return "\n".join(lines) + "\n"


def _emit(report: dict, args) -> None:
    if args.format == "pretty":
        sys.stdout.write(_render_pretty(report))
    else:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _cmd_eval(args) -> int:
    queries: list[dict] = []
    if args.query:
        if args.expr or args.hit_time or args.hit_prob:
            print("error: --query and inline query flags are mutually exclusive", file=sys.stderr)
            return 2
        model_ref, queries = load_queries_file(args.query)
        if not args.model and model_ref:
            args.model = model_ref
    if not args.model:
        print("error: --model is required (or set IPTREE_MODEL, or name a model in the query file)", file=sys.stderr)
        return 2
    tree = load_model_file(args.model)
    if not args.query:
        if args.expr:
            queries.append({"kind": "eval", "expression": args.expr, "condition": args.at, "policy": {}})
        if args.hit_time:
            queries.append({"kind": "hit_time", "targets": args.hit_time.split(","), "condition": args.at, "policy": {}})
        if args.hit_prob:
            queries.append({"kind": "hit_prob", "targets": args.hit_prob.split(","), "condition": args.at, "policy": {}})
    report = {
        "schema": SCHEMA_VERSION,
        "command": "eval",
        "model": args.model,
        "seed": args.seed,
        "results": [],
    }
    start = time.perf_counter()
    status = 0

    def run_one(q: dict) -> dict:
        t0 = time.perf_counter()
        try:
            rec = _run_query(tree, q, args)
        except IptreeError as exc:
            return {"query": q, "ok": False, "error": str(exc)}
        if args.timing:
            rec["wall_time_ms"] = round(1000 * (time.perf_counter() - t0), 3)
        return rec

    if args.parallel and len(queries) > 1:
        with ThreadPoolExecutor() as pool:
            report["results"] = list(pool.map(run_one, queries))
    else:
        report["results"] = [run_one(q) for q in queries]
    if any(not rec["ok"] for rec in report["results"]):
        status = 2
    if args.timing:
        report["wall_time_ms"] = round(1000 * (time.perf_counter() - start), 3)
    _emit(report, args)
    return status


def _cmd_check(args) -> int:
    if not args.model:
        print("error: --model is required (or set IPTREE_MODEL)", file=sys.stderr)
        return 2
    tree = load_model_file(args.model)
    report: dict = {
        "schema": SCHEMA_VERSION,
        "command": "check",
        "what": args.what,
        "model": args.model,
        "seed": args.seed,
    }
    passed = True
    if args.what == "axioms":
        suites = model_axiom_suites(tree, seed=args.seed, trials=args.trials)
        report["suites"] = [r.to_json() for r in suites]
        passed = all(r.passed for r in suites)
    elif args.what == "oracle":
        suite = model_oracle_suite(tree, seed=args.seed, trials=args.trials, depth=args.depth, tol=ORACLE_TOL)
        report["suites"] = [suite.to_json()]
        passed = suite.passed
    else:  # cert
        if not args.target:
            print("error: check cert needs a certificate file", file=sys.stderr)
            return 2
        if not args.expr:
            print("error: check cert needs --expr for the covered gamble", file=sys.stderr)
            return 2
        process, declared = load_certificate_file(args.target, tree.state_space)
        f = compile_gamble(parse_gamble(args.expr, tree.state_space))
        s = parse_situation(tree.state_space, args.at)
        cert = certified_upper_bound(process, f, tree, s)
        report["certificate"] = _certificate_json(cert, tree.state_space, declared)
        passed = cert.valid
    report["passed"] = passed
    _emit(report, args)
    return 0 if passed else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_check(args)
    except IptreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
