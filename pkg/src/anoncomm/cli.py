"""anoncomm command line: demo, verify, search, census and metrics.

Exit codes: 0 pass, 1 a check failed, 2 usage error, 3 resource refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__, protocol, verify
from .fp import SUPPORTED_PRIMES
from .info import DEFAULT_MAX_STATES, StateSpaceTooLarge
from .protocol import SchemeParams
from .schemes import load_scheme

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2, 3
MAX_K = 16
P_UNITS = "p-ary-units"
RATIONAL = "rational as num/den string"


class UsageError(ValueError):
    pass


# -- report helpers --------------------------------------------------------------


def rational(x: Fraction) -> dict:
    x = Fraction(x)
    return {"value": f"{x.numerator}/{x.denominator}", "unit": RATIONAL}


def entropy_field(x) -> dict:
    exact = None
    if isinstance(x, Fraction):
        exact = f"{x.numerator}/{x.denominator}"
    return {"value": float(x), "exact": exact, "unit": P_UNITS}


def metrics_block(m: dict) -> dict:
    return {
        "rate": rational(m["rate"]),
        "rho": entropy_field(m["rho"]),
        "eta": entropy_field(m["eta"]),
        "individual": [entropy_field(h) for h in m["individual"]],
    }


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def base_report(command: str, params: SchemeParams | None) -> dict:
    return {
        "tool": "anoncomm",
        "version": __version__,
        "command": command,
        "params": params.to_dict() if params is not None else None,
    }


# -- validation -----------------------------------------------------------------


def _params(args) -> SchemeParams:
    if not 2 <= args.k <= MAX_K:
        raise UsageError(f"--k must lie in 2..{MAX_K}, got {args.k}")
    if args.p not in SUPPORTED_PRIMES:
        raise UsageError(f"--p must be one of {list(SUPPORTED_PRIMES)}, got {args.p}")
    if args.l < 1:
        raise UsageError(f"--l must be at least 1, got {args.l}")
    n = getattr(args, "n", None)
    if n is not None and n < 1:
        raise UsageError(f"--n must be at least 1, got {n}")
    return SchemeParams(args.k, args.p, args.l, n)


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("expected non-negative integers")
    return vals


# -- commands -----------------------------------------------------------------------


def cmd_demo(args) -> tuple[int, dict]:
    from .sim import run_simulation, write_jsonl

    params = _params(args)
    if params.N != params.L:
        raise UsageError("the demo runs the built-in scheme, which needs N = L")
    if args.rounds < 1:
        raise UsageError(f"--rounds must be at least 1, got {args.rounds}")
    logs = run_simulation(params, args.rounds, args.transport, args.seed, args.audit)
    if args.log_file:
        write_jsonl(logs, args.log_file)
    ok = logs.correct == len(logs) and not logs.traffic.violations
    rep = base_report("demo", params)
    rep.update({
        "verdict": "pass" if ok else "fail",
        "simulation": {
            "rounds": len(logs),
            "correct": logs.correct,
            "failed": logs.failed,
            "transport": logs.transport,
            "seed": logs.seed,
            "audit_mode": logs.audit_mode,
            "traffic": logs.traffic.to_dict(),
            "log_file": args.log_file,
        },
        "round_summaries": [
            {"round_id": lg.round_id, "status": lg.status, "transcript": lg.transcript, "decoded": lg.decoded,
             "correct": lg.correct, "theta": lg.theta}
            for lg in logs
        ],
    })
    return (EXIT_PASS if ok else EXIT_FAIL), rep


def cmd_verify(args) -> tuple[int, dict]:
    scheme = None
    if args.scheme:
        try:
            scheme = load_scheme(args.scheme)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot load scheme {args.scheme}: {exc}") from None
        params = scheme.params
    else:
        params = _params(args)
    names = verify.CHECK_NAMES if args.checks == "all" else [c.strip() for c in args.checks.split(",") if c.strip()]
    bad = set(names) - set(verify.CHECK_NAMES)
    if bad:
        raise UsageError(f"unknown checks {sorted(bad)}; choose from {list(verify.CHECK_NAMES)} or 'all'")
    cap = args.max_states if args.max_states is not None else DEFAULT_MAX_STATES
    reports = verify.run_checks(scheme, params, names, cap=cap)
    metrics = verify.share_metrics(scheme, params, cap=cap)
    ok = all(r.verdict != "fail" for r in reports)
    rep = base_report("verify", params)
    rep.update({
        "verdict": "pass" if ok else "fail",
        "scheme": scheme.name if scheme is not None else "builtin",
        "checks": [r.to_dict() for r in reports],
        "metrics": metrics_block(metrics),
    })
    return (EXIT_PASS if ok else EXIT_FAIL), rep


def cmd_search(args) -> tuple[int, dict]:
    from .search import search

    params = _params(args)
    dims = args.seed_dims
    if dims is None:
        dims = list(range(3)) if args.model == "general" else list(range(params.K + 1))
    results = []
    for s in dims:
        ck = None
        if args.checkpoint:
            ck = args.checkpoint if len(dims) == 1 else f"{args.checkpoint}.s{s}"
        res = search(
            args.model, params, s, args.stop_at_first,
            workers=args.workers, cap=args.max_states, checkpoint=ck,
        )
        results.append(res.to_dict())
    found = [d["seed_dim"] for d in results if int(d["valid_schemes_found"]) > 0]
    rep = base_report("search", params)
    rep.update({
        "verdict": "pass",
        "model": args.model,
        "searches": results,
        "min_seed_dimension": min(found) if found else None,
    })
    return EXIT_PASS, rep


def cmd_census(args) -> tuple[int, dict]:
    from .search import forced_decoder_census

    params = _params(args)
    cap = args.max_states if args.max_states is not None else DEFAULT_MAX_STATES
    report = forced_decoder_census(params, args.seed_dim, cap=cap)
    doc = report.to_dict()
    ok = bool(report.accepted) and report.all_latin and report.all_match_sum_table
    rep = base_report("census", params)
    rep.update({"verdict": "pass" if ok else "fail", "census": doc})
    return (EXIT_PASS if ok else EXIT_FAIL), rep


def cmd_metrics(args) -> tuple[int, dict]:
    params = _params(args)
    if params.N != params.L:
        raise UsageError("metrics are reported for the built-in scheme, which needs N = L")
    cap = args.max_states if args.max_states is not None else DEFAULT_MAX_STATES
    m = protocol.metrics(params, cap)
    rep = base_report("metrics", params)
    rep.update({
        "verdict": "pass",
        "metrics": metrics_block({"rate": m.rate, "rho": m.rho, "eta": m.eta, "individual": list(m.individual)}),
    })
    return EXIT_PASS, rep


# -- rendering ------------------------------------------------------------------------


def _fmt_entropy(f: dict) -> str:
    if f["exact"] is None:
        return f"{f['value']:.12g}"
    return f["exact"].removesuffix("/1")


def render_human(rep: dict) -> str:
    out = []
    cmd = rep["command"]
    if rep.get("params"):
        pr = rep["params"]
        out.append(f"{cmd}: K={pr['K']} p={pr['p']} L={pr['L']} N={pr['N']}")
    if "error" in rep:
        err = rep["error"]
        out.append(f"refused: {err['message']}")
        if err["cap"] is not None:
            out.append(f"  required states: {err['required_states']} (cap {err['cap']})")
    if cmd == "demo" and "simulation" in rep:
        shown = rep["round_summaries"]
        for r in shown[:50]:
            theta = f" theta={r['theta']}" if r["theta"] is not None else ""
            if r["status"] == "ok":
                out.append(f"  round {r['round_id']}:{theta} transcript {r['transcript']} -> {r['decoded']} "
                           f"{'ok' if r['correct'] else 'WRONG'}")
            else:
                out.append(f"  round {r['round_id']}:{theta} failed")
        if len(shown) > 50:
            out.append(f"  ... {len(shown) - 50} more rounds")
        sim = rep["simulation"]
        out.append(f"{sim['correct']}/{sim['rounds']} correct over {sim['transport']} (seed {sim['seed']}), "
                   f"{len(sim['traffic']['violations'])} traffic-audit violations")
    for c in rep.get("checks", []):
        line = f"  {c['check_name']:<20} {c['verdict']}"
        if c["details"].get("colluders") is not None:
            line += f"  colluders={c['details']['colluders']}"
        out.append(line)
        if c["verdict"] == "fail":
            out.append(f"    witness: {json.dumps(c['witness'], default=_jsonable)}")
    if "metrics" in rep:
        m = rep["metrics"]
        out.append(f"  rate {m['rate']['value']}  rho {_fmt_entropy(m['rho'])}  eta {_fmt_entropy(m['eta'])}  "
                   f"({P_UNITS})")
    for s in rep.get("searches", []):
        line = (f"  {s['model']} seed_dim={s['seed_dim']}: {s['valid_schemes_found']} valid of "
                f"{s['space_size']} candidates ({s['visited']} visited, {s['elapsed_seconds']:.2f}s)")
        if s["min_rho"] is not None:
            line += f"  min rho {str(s['min_rho']).removesuffix('/1')}  min eta {str(s['min_eta']).removesuffix('/1')}"
        out.append(line)
    if cmd == "search" and "searches" in rep:
        out.append(f"  min seed dimension: {rep['min_seed_dimension']}")
    if "census" in rep:
        c = rep["census"]
        out.append(f"  {c['distinct_accepted_decoders']} accepted decoders over {c['decoders_examined']} "
                   f"({c['valid_schemes_total']} valid schemes)")
        for d in c["accepted_decoders"]:
            out.append(f"    table {d['table']}  schemes {d['valid_schemes']}")
        out.append(f"  latin: {c['all_latin']}  sum table up to constant: {c['all_match_sum_table']}  "
                   f"constants w: {c['constants_w']}")
    out.append(f"verdict: {rep['verdict']}")
    return "\n".join(out)


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anoncomm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, default=3, help="number of transmitters")
    common.add_argument("--p", type=int, default=2, help="field size (prime)")
    common.add_argument("--l", type=int, default=1, help="message length in symbols")
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--max-states", type=int, default=None,
                        help=f"enumeration cap (default {DEFAULT_MAX_STATES:.0e}; searches are uncapped by default)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--output", help="also write the JSON report to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", parents=[common], help="run the actor simulation")
    demo.add_argument("--rounds", type=int, default=10)
    demo.add_argument("--seed", type=int, default=None, help="generator seed (else $ANONCOMM_SEED)")
    demo.add_argument("--transport", choices=("in-process", "stream"), default="in-process")
    demo.add_argument("--audit", action="store_true", help="record theta in round logs")
    demo.add_argument("--log-file", help="write round logs as JSON lines")
    demo.set_defaults(func=cmd_demo)

    ver = sub.add_parser("verify", parents=[common], help="run exhaustive property checks")
    ver.add_argument("--n", type=int, default=None, help="channel uses (default L)")
    ver.add_argument("--checks", default="all", help="comma-separated checks or 'all'")
    ver.add_argument("--scheme", help="scheme JSON file to verify instead of the built-in scheme")
    ver.set_defaults(func=cmd_verify)

    se = sub.add_parser("search", parents=[common], help="brute-force scheme search")
    se.add_argument("--model", choices=("general", "linear"), default="linear")
    se.add_argument("--seed-dims", type=_int_list, default=None, help="e.g. 0,1,2")
    se.add_argument("--stop-at-first", action="store_true")
    se.add_argument("--checkpoint", help="checkpoint file for resumable searches")
    se.set_defaults(func=cmd_search)

    ce = sub.add_parser("census", parents=[common], help="census of decoders of valid schemes")
    ce.add_argument("--seed-dim", type=int, default=None, help="default K-1")
    ce.set_defaults(func=cmd_census)

    me = sub.add_parser("metrics", parents=[common], help="rate and randomness sizes of the built-in scheme")
    me.set_defaults(func=cmd_metrics)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        code, rep = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"anoncomm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateSpaceTooLarge as exc:
        code = EXIT_REFUSED
        try:
            params = _params(args)
        except (UsageError, ValueError):
            params = None
        rep = base_report(args.command, params)
        reason = getattr(exc, "reason", None)
        rep.update({
            "verdict": "refused",
            "error": {
                "kind": "unsupported_search_space" if reason else "state_space_too_large",
                "message": str(exc),
                "required_states": str(exc.required),
                "cap": None if reason else str(exc.cap),
            },
        })
    rep["exit_code"] = code
    rep["units"] = {"entropy": P_UNITS, "rate": RATIONAL}
    text = json.dumps(rep, indent=2, default=_jsonable)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text if args.format == "json" else render_human(rep))
    return code


if __name__ == "__main__":
    sys.exit(main())
