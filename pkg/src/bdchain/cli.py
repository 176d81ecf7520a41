"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 an uncertifiable limit,
3 a failed verification.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, montecarlo, oracle
from .asymptotics import LimitPolicy, VerdictKind, classify_t_limit, sum_t
from .chain import ChainSpecError, ConstantBias, PaperHarmonic, ScaleEmbedding, parse_chain

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_VERIFY = 0, 1, 2, 3
KOK_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _policy(args) -> LimitPolicy:
    return LimitPolicy(max_terms=args.max_terms, rel_tol=args.rel_tol, ratio_window=args.ratio_window)


def _extinction_dict(res) -> dict:
    return {"value": res.value, "exact_one": res.exact_one, "error_bound": res.error_bound}


def _limit_dict(lim) -> dict:
    return {"kind": lim.kind.value, "value": lim.value, "error_bound": lim.error_bound, "reason": lim.reason}


# -- commands ---------------------------------------------------------------


def cmd_analyze(args, spec) -> int:
    emb = ScaleEmbedding(spec)
    policy = _policy(args)
    sum_verdict = sum_t(emb, policy)
    t_verdict = classify_t_limit(emb, policy)
    report = {
        "chain": spec.text(),
        "k": args.k,
        "x_infinity": sum_verdict.as_dict(),
        "t_limit": t_verdict.as_dict(),
    }
    warnings = []
    try:
        report["extinction"] = _extinction_dict(analysis.extinction_probability(emb, args.k, policy))
    except analysis.CertificateError as exc:
        report["extinction"] = None
        warnings.append(f"extinction probability: {exc}")
    lim = analysis.limit_expectation(emb, args.k, policy)
    report["limit_expectation"] = _limit_dict(lim)
    if lim.kind is analysis.LimitKind.NO_LIMIT:
        warnings.append(f"limit of E[X_m]: {lim.reason}")
    report["warnings"] = warnings

    if args.json:
        _emit(render_json(report), args.out)
    else:
        lines = [f"chain: {spec.text()}   start k = {args.k}"]
        lines.append(f"sum of t_n (x_inf): {_describe(sum_verdict)}")
        lines.append(f"limit of t_n:       {_describe(t_verdict)}")
        ext = report["extinction"]
        if ext is not None:
            tag = " (exact)" if ext["exact_one"] else f" +/- {ext['error_bound']:.3g}"
            lines.append(f"extinction probability: {ext['value']:.12g}{tag}")
        lines.append(f"lim E[X_m]: {_describe_limit(lim)}")
        for w in warnings:
            lines.append(f"WARNING: {w}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_INCONCLUSIVE if warnings else EXIT_OK


def _describe(v) -> str:
    if v.kind is VerdictKind.CONVERGES:
        return f"converges to {v.value:.12g} +/- {v.error_bound:.3g} ({v.terms_examined} terms)"
    if v.kind is VerdictKind.ZERO:
        return f"tends to 0 ({v.reason or f'{v.terms_examined} terms'})"
    if v.kind is VerdictKind.DIVERGES:
        return f"diverges ({v.reason or f'{v.terms_examined} terms'})"
    return f"inconclusive: {v.reason}"


def _describe_limit(lim) -> str:
    if lim.kind is analysis.LimitKind.FINITE:
        return f"{lim.value:.12g} +/- {lim.error_bound:.3g}"
    if lim.kind is analysis.LimitKind.INFINITE:
        return "infinite"
    return f"no limit certified ({lim.reason})"


def cmd_curve(args, spec) -> int:
    run = oracle.sweep(spec, args.k, args.m, args.state_cap)
    _emit(oracle.curve_csv(run), args.out)
    return EXIT_OK


def cmd_profile(args, spec) -> int:
    prof = oracle.local_time_profile(spec, ScaleEmbedding(spec), args.k, args.m, args.state_cap)
    _emit(oracle.profile_csv(prof), args.out)
    return EXIT_OK


def cmd_simulate(args, spec) -> int:
    config = montecarlo.SimConfig(args.seed, args.paths, args.horizon, args.sim_state_cap, args.workers)
    record = {
        "chain": spec.text(),
        "k": args.k,
        "config": {
            "seed": config.seed,
            "paths": config.paths,
            "horizon": config.horizon,
            "state_cap": config.state_cap,
            "workers": config.workers,
            "m": args.m,
        },
        "extinction": montecarlo.estimate_extinction(spec, args.k, config).as_dict(),
    }
    if args.m is not None:
        record["expectation"] = montecarlo.estimate_expectation(spec, args.k, args.m, config).as_dict()
    if args.dump_paths:
        path_file = args.dump_file or "paths.csv"
        with open(path_file, "w", newline="") as fh:
            fh.write(montecarlo.paths_csv(spec, args.k, args.seed, args.horizon, args.dump_paths))
        record["path_dump"] = {"file": path_file, "count": args.dump_paths}

    if args.json:
        _emit(render_json(record), args.out)
    else:
        ext = record["extinction"]
        lines = [
            f"chain: {spec.text()}   k = {args.k}   seed = {args.seed}   paths = {args.paths}",
            f"extinct by step {args.horizon}: {ext['mean']:.6g} +/- {ext['std_error']:.3g} "
            f"(95% CI {ext['ci95'][0]:.6g}..{ext['ci95'][1]:.6g}; {ext['truncated_paths']} alive at horizon)",
        ]
        if "expectation" in record:
            e = record["expectation"]
            lines.append(f"E[X_{args.m}]: {e['mean']:.6g} +/- {e['std_error']:.3g}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_embed(args, spec) -> int:
    emb = ScaleEmbedding(spec)
    out = montecarlo.simulate_path(spec, args.k, args.seed, 0, args.steps, record=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "state", "x"])
    for s, state in enumerate(out.trajectory):
        w.writerow([s, int(state), _fmt(emb.x(int(state)))])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def run_checks(spec, k: int, m: int, state_cap: int = oracle.DEFAULT_STATE_CAP) -> list[dict]:
    """Identity suite behind ``verify``; each entry has ``name``, ``ok``, ``detail``."""
    emb = ScaleEmbedding(spec)
    checks = []
    run = oracle.sweep(spec, k, m, state_cap)
    prof = oracle.local_time_profile(spec, emb, k, m, state_cap)

    tanaka = analysis.tanaka_expectation(emb, k, prof)
    dp = float(run.expectation[-1])
    checks.append(
        {
            "name": "tanaka_identity",
            "ok": abs(tanaka - dp) <= KOK_TOL,
            "detail": f"local-time sum {tanaka!r} vs DP E[X_{m}] {dp!r}",
        }
    )

    mono = oracle.check_monotonicity(prof, k)
    checks.append(
        {
            "name": "local_time_monotone",
            "ok": mono.ok,
            "detail": "nonincreasing for n >= k"
            if mono.ok
            else f"E[L at x_{mono.violation}] = {prof.values[mono.violation]!r} < "
            f"E[L at x_{mono.violation + 1}] = {prof.values[mono.violation + 1]!r}",
        }
    )

    drift = np.abs(run.total - 1.0)
    worst = int(np.argmax(drift))
    absorbed = np.diff(run.extinct)
    ok_mass = bool(drift[worst] <= oracle.MASS_TOL and (absorbed >= -oracle.MASS_TOL).all())
    checks.append(
        {
            "name": "mass_conservation",
            "ok": ok_mass,
            "detail": f"max |total mass - 1| = {drift[worst]:.3g} at step {worst}",
        }
    )

    stop = k + m + 2
    grid_r = emb.right_probabilities(stop)[1:]
    _, spec_r = spec.arrays(1, stop)
    err = np.abs(grid_r - spec_r)
    bad = int(np.argmax(err)) + 1
    checks.append(
        {
            "name": "skeleton_identity",
            "ok": bool(err.max() <= 1e-12),
            "detail": f"max |grid r_n - r_n| = {err.max():.3g} at n = {bad}",
        }
    )
    return checks


def cmd_verify(args, spec) -> int:
    checks = run_checks(spec, args.k, args.m, args.state_cap)
    failed = [c for c in checks if not c["ok"]]
    if args.json:
        _emit(render_json({"chain": spec.text(), "k": args.k, "m": args.m, "checks": checks}), args.out)
    else:
        lines = [f"{'PASS' if c['ok'] else 'FAIL'} {c['name']}: {c['detail']}" for c in checks]
        if failed:
            lines.append(f"first counterexample: {failed[0]['detail']}")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_VERIFY if failed else EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bdchain", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--chain", required=True, help="constant:p=P | paper-harmonic | table:FILE,tail=SPEC")
    common.add_argument("--k", type=int, default=1, help="start state (default 1)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--max-terms", type=int, default=LimitPolicy.max_terms)
    common.add_argument("--rel-tol", type=float, default=LimitPolicy.rel_tol)
    common.add_argument("--ratio-window", type=int, default=LimitPolicy.ratio_window)
    common.add_argument("--state-cap", type=int, default=oracle.DEFAULT_STATE_CAP)

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analyze", parents=[common], help="extinction probability and long-run mean")

    for name, helptext in (("curve", "exact E[X_i] and extinct mass"), ("profile", "exact expected local times")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--m", type=int, required=True, help="horizon")

    p = sub.add_parser("verify", parents=[common], help="run the exact identity suite")
    p.add_argument("--m", type=int, default=100)

    p = sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo estimates")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--m", type=int, help="also estimate E[X_m]")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sim-state-cap", type=int, help="stop paths reaching this state")
    p.add_argument("--dump-paths", type=int, default=0, metavar="N", help="write the first N paths")
    p.add_argument("--dump-file", help="CSV for --dump-paths (default paths.csv)")

    p = sub.add_parser("embed", parents=[common], help="one skeleton path with grid coordinates")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, default=100)
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "curve": cmd_curve,
    "profile": cmd_profile,
    "simulate": cmd_simulate,
    "embed": cmd_embed,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = parse_chain(args.chain)
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        for name in ("m", "steps", "horizon"):
            if getattr(args, name, None) is not None and getattr(args, name) < 0:
                raise UsageError(f"--{name} must be >= 0")
        _policy(args)
        return _COMMANDS[args.command](args, spec)
    except (ChainSpecError, UsageError, ValueError, OSError, oracle.StateCapExceeded) as exc:
        print(f"bdchain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
