"""Command-line front end.

Every subcommand prints JSON (or CSV where the report is a table) to stdout,
or writes it to --out together with a ``<out>.manifest.json`` sidecar.

Exit codes: 0 success, 1 a certificate or invariant check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .ratcore import RatInterval, as_rational, rat_str

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    def __init__(self, payload, failures: list[str]):
        super().__init__("; ".join(failures))
        self.payload, self.failures = payload, failures


# -- argument types -----------------------------------------------------------------

def rational(text: str) -> Fraction:
    if any(c in text for c in ".eE") and "/" not in text:
        raise argparse.ArgumentTypeError(f"{text!r}: use exact a/b syntax, not decimals")
    try:
        return as_rational(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational a/b") from None


def rational_list(text: str) -> list[Fraction]:
    return [rational(t) for t in text.split(",") if t.strip()]


def int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from None


def int_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a range lo:hi") from None
    if not sep or lo > hi:
        raise argparse.ArgumentTypeError(f"{text!r} is not a range lo:hi with lo <= hi")
    return lo, hi


def interval(text: str) -> RatInterval:
    try:
        return RatInterval.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"{text!r}: {exc}") from None


def stepfn(text: str):
    from .stepfn import StepFunctionSpec

    try:
        return StepFunctionSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cfnumber(text: str):
    from .cfnum import CFNumber

    try:
        return CFNumber.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{text!r}: {exc}") from None


# -- subcommands --------------------------------------------------------------------
# each returns (payload, csv_rows or None, failures)

def cmd_cf(a):
    from .ratcore import cf_expand, cf_value, convergents, non_canonical_twin

    if a.x is not None:
        w = cf_expand(a.x)
        conv = convergents(w)
        payload = {
            "x": rat_str(a.x),
            "cf": w.as_list(),
            "twin": non_canonical_twin(w).as_list(),
            "convergents": [f"{p}/{q}" for p, q in conv],
        }
        fails = [] if cf_value(w) == a.x else [f"round trip: cf_value gives {rat_str(cf_value(w))}"]
        return payload, [["k", "p", "q"]] + [[k, p, q] for k, (p, q) in enumerate(conv)], fails
    z = a.number
    conv = z.convergents_upto(a.terms)
    payload = {"number": z.describe(), "convergents": [f"{p}/{q}" for p, q in conv]}
    return payload, [["k", "p", "q"]] + [[k, p, q] for k, (p, q) in enumerate(conv)], []


def cmd_zaremba(a):
    from .zaremba import zaremba_numerators

    zs = zaremba_numerators(a.q, a.m)
    payload = {"q": a.q, "m": a.m, "numerators": list(zs.numerators), "count": len(zs)}
    return payload, [["u"]] + [[u] for u in zs.numerators], []


def cmd_density(a):
    from .zaremba import density_report

    rep = density_report(a.T, a.gamma, a.m, a.sigma, threads=a.threads)
    return rep.to_json(), rep.csv_rows(), []


def cmd_productset(a):
    from .productset import ProductSetInstance, product_report, sweep

    if a.sweep is not None:
        reports = sweep(a.sweep[0], a.sweep[1], a.m, threads=a.threads)
        payload = {"m": a.m, "range": f"{a.sweep[0]}:{a.sweep[1]}", "reports": reports}
    else:
        if a.N is None or a.M is None or a.L is None or a.H is None:
            raise UsageError("--N, --M, --L and --H are required without --sweep")
        reports = [product_report(ProductSetInstance(a.N, frozenset(a.M), a.L, a.H))]
        payload = reports[0]
    fails = []
    for r in reports:
        if r["vinogradov_violations"]:
            fails.append(f"vinogradov bound at N={r['N']}, lambda={r['vinogradov_violations'][:5]}")
        if not r["et_ok"]:
            fails.append(f"discrepancy chain at N={r['N']}: D*={r['discrepancy']}, window_count={r['window_count']}")
    rows = [["N", "M_card", "L", "H", "E_card", "max_vinogradov_ratio", "et_ok"]]
    rows += [[r["N"], r["M_card"], r["L"], r["H"], r["E_card"], r["max_vinogradov_ratio"], int(r["et_ok"])] for r in reports]
    return payload, rows, fails


def cmd_witness(a):
    from .witness import SearchConfig, find_witnesses

    cfg = SearchConfig(a.I, a.J, a.tau, a.m, a.range[0], a.range[1],
                       max_witnesses=None if a.max == 0 else a.max, strategy=a.strategy)
    t0 = time.perf_counter()
    certs = find_witnesses(cfg, threads=a.threads)
    payload = {"config": cfg.to_json(), "witnesses": [c.to_json() for c in certs], "count": len(certs)}
    if a.timings:
        payload["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    fails = [f"witness {c.quadruple}: {c.failed}" for c in certs if not c.ok]
    rows = [["p", "q", "r", "s", "ratio"]] + [[c.quadruple.p, c.quadruple.q, c.quadruple.r, c.quadruple.s,
                                              rat_str(c.ratio)] for c in certs]
    return payload, rows, fails


def cmd_build(a):
    from .builder import BuilderParams, midpoint_value, params_from_optimizer, placement_ok, run, validate_params

    lo, hi = a.prime_range
    if a.d is None or a.beta is None:
        p = params_from_optimizer(a.m, a.tau, a.rho, steps=a.steps, prime_lo=lo, prime_hi=hi)
    else:
        p = BuilderParams(a.m, a.tau, a.d, a.rho * a.beta if a.alpha is None else a.alpha, a.beta, a.steps,
                          prime_lo=lo, prime_hi=hi)
    bad = validate_params(p)
    if bad:
        raise UsageError("invalid parameters: " + "; ".join(bad))
    res = run(p, threads=a.threads)
    payload = res.to_json()
    fails = []
    for c in res.certificates:
        mid = midpoint_value(res.state, c.k)
        if c.certified_lower <= 0:
            fails.append(f"level {c.k}: certified_lower {rat_str(c.certified_lower)} is not positive")
        if c.certified_lower > mid:
            fails.append(f"level {c.k}: certified_lower {rat_str(c.certified_lower)} exceeds midpoint value {rat_str(mid)}")
    for k in range(len(res.state.history)):
        if not placement_ok(res.state, k, p):
            fails.append(f"level {k}: placement window violated")
    return payload, None, fails


def cmd_twisted(a):
    from . import twisted

    spec = twisted.bad_tuple(a.zeta)
    try:
        trace, certs = twisted.build_and_certify(spec, a.phi, a.levels, cutoff=a.cutoff)
    except twisted.SearchCutoff as exc:
        raise VerificationFailed({"error": str(exc)}, [f"search cutoff: {exc}"]) from None
    payload = twisted.trace_json(trace, spec, a.phi, certs)
    fails = [f"level {c.k}: value {rat_str(c.value)} < target {rat_str(c.target)}" for c in certs if not c.ok]
    return payload, None, fails


def cmd_sarith(a):
    from . import sarith

    if a.mode == "padic":
        levels, certs = sarith.padic_run(sarith.PadicParams(a.p, tuple(a.beta), a.depth))
        payload = {"construction": [lv.to_json() for lv in levels], "certificates": [c.to_json() for c in certs]}
        fails = [f"level {c.k}: value {rat_str(c.value)} outside [{rat_str(c.floor)}, 1]" for c in certs if not c.ok]
        return payload, None, fails
    if a.mode == "twisted":
        S = sarith.SSpec.parse(a.S)
        levels = sarith.build_s_twisted(S, a.base, a.phi, a.depth + 1)
        enc = levels[-1].interval
        certs = [sarith.certify_s_twisted(enc, levels, k, S, a.phi, a.base) for k in range(a.depth)]
        payload = {"construction": [lv.to_json() for lv in levels[: a.depth]],
                   "certificates": [c.to_json() for c in certs], "xi": enc.to_json()}
        fails = [f"level {c.k}: value {rat_str(c.value)} < 1/3" for c in certs if not c.ok]
        for c in certs:
            m = c.cases.get("multiple")
            if m is not None and not m["ok"]:
                fails.append(f"level {c.k}: multiple case {m['value']} < {m['floor']}")
        return payload, None, fails
    rows = sarith.singleton_scan(a.xi, a.exclude, a.Q)
    payload = {"xi": a.xi.describe(), "excluded": a.exclude, "scan": [r.to_json() for r in rows]}
    table = [["Q", "lower", "upper", "argmin"]] + [
        [r.Q, "" if r.lower is None else rat_str(r.lower), rat_str(r.upper), r.argmin] for r in rows]
    return payload, table, []


def cmd_eval(a):
    from . import evaluate

    if (a.x is None) == (a.enclosure is None):
        raise UsageError("give exactly one of --x or --enclosure")
    items = a.x if a.x is not None else a.enclosure
    if not 1 <= len(items) <= evaluate.MAX_COMPONENTS:
        raise UsageError(f"between 1 and {evaluate.MAX_COMPONENTS} components are supported")
    enc = a.enclosure is not None
    if a.profile is not None:
        rows = evaluate.profile(items, a.profile, enclosures=enc)
        payload = {"profile": evaluate.profile_json(rows)}
        return payload, [["Q", "value"]] + [[Q, rat_str(v)] for Q, v in rows], []
    if a.Q is None:
        raise UsageError("--Q or --profile is required")
    if a.psi is not None:
        if enc:
            raise UsageError("--psi works with --x only")
        v = evaluate.weighted_min(items, a.Q, a.psi)
    else:
        v = evaluate.dmin_lower(items, a.Q) if enc else evaluate.dmin(items, a.Q)
    payload = {"Q": a.Q, "value": rat_str(v), "value_approx": float(v)}
    return payload, [["Q", "value"], [a.Q, rat_str(v)]], []


def cmd_optimize(a):
    from .optimize import solve

    r = solve(a.m, tau=a.tau, rho=a.rho)
    payload = r.to_json()
    fails = [] if r.bound > 0 else [f"bound {payload['bound']} is not positive"]
    return payload, None, fails


# -- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("output")
    g.add_argument("--out", help="write the report to this path (plus a .manifest.json sidecar)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--threads", type=int, default=1, help="worker processes; output does not depend on it")
    g.add_argument("--timings", action="store_true", help="include wall-clock fields in the report")
    g.add_argument("--config", help="JSON file of default flag values for this subcommand")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ulc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cf", help="continued fraction of a rational or convergents of a named number")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--x", type=rational)
    g.add_argument("--number", type=cfnumber, help='name or "a0;a1,a2|b1,b2"')
    p.add_argument("--terms", type=int, default=10)
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("zaremba", help="numerators u with u/q in F_m")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_zaremba)

    p = sub.add_parser("density", help="|M_q| against q^sigma over primes in [gamma T, T]")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--gamma", type=rational, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sigma", type=rational, required=True)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("productset", help="exceptional multipliers and their exponential-sum checks")
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int_list)
    p.add_argument("--L", type=int)
    p.add_argument("--H", type=int)
    p.add_argument("--sweep", type=int_range, help="all primes lo:hi with Zaremba numerators and the middle third")
    p.add_argument("--m", type=int, default=5)
    p.set_defaults(func=cmd_productset)

    p = sub.add_parser("witness", help="search for witness quadruples (p, q, r, s)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", type=rational, required=True)
    p.add_argument("--range", type=int_range, required=True)
    p.add_argument("--I", type=interval, required=True)
    p.add_argument("--J", type=interval, required=True)
    p.add_argument("--max", type=int, default=1, help="number of witnesses; 0 for all")
    p.add_argument("--strategy", choices=("auto", "window", "inversion"), default="auto")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("build", help="nested-interval construction with certificates")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", type=rational, required=True)
    p.add_argument("--d", type=rational)
    p.add_argument("--beta", type=rational)
    p.add_argument("--alpha", type=rational)
    p.add_argument("--rho", type=rational, default=Fraction(1, 2), help="alpha = rho * beta when --alpha is absent")
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--prime-range", type=int_range, default=(5, 200))
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("twisted", help="construction against a badly approximable tuple")
    p.add_argument("--zeta", type=lambda t: [cfnumber(x) for x in t.split("+")], default="golden",
                   help='components joined by "+", e.g. golden+sqrt2')
    p.add_argument("--phi", type=stepfn, default="id")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--cutoff", type=int, default=10**7)
    p.set_defaults(func=cmd_twisted)

    p = sub.add_parser("sarith", help="S-arithmetic constructions and the decay scan")
    p.add_argument("mode", choices=("padic", "twisted", "scan"))
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--beta", type=rational_list, default=[Fraction(1, 10)])
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--S", default="include:3,5")
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--phi", type=stepfn, default="sqrt")
    p.add_argument("--xi", type=cfnumber, default="sqrt2")
    p.add_argument("--exclude", type=int, default=3)
    p.add_argument("--Q", type=int_list, default=[100, 10000])
    p.set_defaults(func=cmd_sarith)

    p = sub.add_parser("eval", help="Q min_n prod ||n x_i|| at points or over enclosures")
    p.add_argument("--x", type=rational_list)
    p.add_argument("--enclosure", type=interval, action="append")
    p.add_argument("--Q", type=int)
    p.add_argument("--psi", type=stepfn)
    p.add_argument("--profile", type=int_list, help="ascending Q values")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", help="optimal (d, beta) for the two-branch bound")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", type=rational, default=Fraction(1))
    p.add_argument("--rho", type=rational, default=Fraction(1))
    p.set_defaults(func=cmd_optimize)

    for p in sub.choices.values():
        _common(p)
    return ap


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _parse(argv) -> argparse.Namespace:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    command = next((t for t in argv if not t.startswith("-")), None)
    subparsers = ap._subparsers._group_actions[0].choices
    if path and command in subparsers:
        try:
            with open(path) as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            ap.error(f"--config: {exc}")
        if not isinstance(cfg, dict):
            ap.error("--config: expected a JSON object")
        sp = subparsers[command]
        known = {act.dest: act for act in sp._actions}
        for key, val in cfg.items():
            if key not in known or key in ("help", "config"):
                ap.error(f"--config: unknown option {key!r}")
            act = known[key]
            if isinstance(val, str) and act.type is not None:
                try:
                    val = act.type(val)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    ap.error(f"--config: {key}: {exc}")
            act.required = False
            sp.set_defaults(**{key: val})
    return ap.parse_args(argv)


def _render(payload, rows, fmt: str) -> str:
    if fmt == "csv":
        if rows is None:
            raise UsageError("--format csv is not available for this subcommand")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    return json.dumps(payload, indent=2) + "\n"


def _echo(a) -> dict:
    out = {}
    for k, v in sorted(vars(a).items()):
        if k in ("func", "out", "timings"):
            continue
        out[k] = _plain(v)
    return out


def _plain(v):
    if isinstance(v, Fraction):
        return rat_str(v)
    if isinstance(v, RatInterval):
        return v.to_json()
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if hasattr(v, "describe"):
        return v.describe()
    return v


def main(argv=None) -> int:
    try:
        a = _parse(argv)
    except SystemExit as exc:  # argparse already printed the offending flag
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if a.threads < 1:
        print("ulc: error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        payload, rows, fails = a.func(a)
    except VerificationFailed as exc:
        payload, rows, fails = exc.payload, None, exc.failures
    except (UsageError, ValueError) as exc:
        print(f"ulc {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if a.timings and isinstance(payload, dict):
        payload.setdefault("elapsed_ms", round((time.perf_counter() - t0) * 1000, 3))
    if fails:
        code = EXIT_FAIL
        for f in fails:
            print(f"ulc {a.command}: verification failed: {f}", file=sys.stderr)
    try:
        text = _render(payload, rows, a.format)
    except UsageError as exc:
        print(f"ulc {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(text)
        manifest = {
            "subcommand": a.command,
            "params": _echo(a),
            "version": __version__,
            "wall_time_s": round(time.perf_counter() - t0, 6),
            "output": a.out,
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "exit_code": code,
        }
        with open(a.out + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
