"""Command-line front end.

Exit status: 0 on success, 1 on a domain outcome (conditioning on a null
event, no recurrence found, a check that fails), 2 on usage or input errors.
Exact rationals print as ``num/den``; floats with 10 significant digits.
``--out structured`` prints one JSON envelope ``{"command", "input", "result"}``.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import crn, genfun, guess, recurrence
from .errors import NetworkSyntaxError, NullConditioningError
from .exact import Poly, to_fraction
from .fixtures import FIXTURES, MATRICES, two_row_printed_recurrence


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    pass


# ----------------------------------------------------------------------------
# rendering


def q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fl(x) -> str:
    return format(float(x), ".10g")


def render(value) -> dict:
    """Exact value as a structured record."""
    if isinstance(value, Poly):
        return {"polynomial": str(value), "variables": list(value.variables), "terms": value.to_terms()}
    if value is None:
        return {"exact": None, "float": None}
    return {"exact": q(value), "float": fl(value)}


def pt(point) -> str:
    return "(" + ", ".join(str(v) for v in point) + ")"


# ----------------------------------------------------------------------------
# argument helpers


def parse_list(text: str, what: str) -> list:
    parts = [p.strip() for p in text.replace(";", ",").split(",")]
    if not text.strip() or any(not p for p in parts):
        raise UsageError(f"malformed {what} list {text!r}")
    return parts


def parse_rationals(text: str, what: str) -> list:
    try:
        return [to_fraction(p) for p in parse_list(text, what)]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed {what} list {text!r}") from None


def parse_counts(text: str, what: str = "count") -> tuple:
    out = []
    for p in parse_list(text, what):
        try:
            v = int(p)
        except ValueError:
            raise UsageError(f"{what} entries must be integers, got {p!r}") from None
        out.append(v)
    return tuple(out)


def load_matrix(spec: Optional[str]) -> genfun.ConstraintMatrix:
    if spec is None:
        raise UsageError("--matrix is required")
    if spec in MATRICES:
        return MATRICES[spec]
    text = spec
    if os.path.isfile(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return genfun.ConstraintMatrix.parse(text)
    except ValueError as exc:
        raise UsageError(f"bad matrix: {exc}") from None


def rates_for(args, A) -> Optional[list]:
    if args.mode == "symbolic":
        if args.lam is not None:
            raise UsageError("--mode symbolic takes no --lambda")
        return None
    if args.lam is None:
        raise UsageError("--lambda is required (or use --mode symbolic)")
    lam = parse_rationals(args.lam, "lambda")
    if len(lam) != A.n:
        raise UsageError(f"--lambda has {len(lam)} entries but the matrix has {A.n} columns")
    return lam


def counts_for(args, A) -> tuple:
    if args.b is None:
        raise UsageError("--b is required")
    b = parse_counts(args.b, "b")
    if len(b) != A.m:
        raise UsageError(f"--b has {len(b)} entries but the matrix has {A.m} rows")
    if any(x < 0 for x in b):
        raise UsageError("--b entries must be non-negative")
    return b


def numeric_only(args):
    if args.mode == "symbolic":
        raise UsageError(f"{args.command} needs numeric rates")


def parse_window(text: str, m: int) -> recurrence.Box:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"--window expects LO:HI, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise UsageError("--window needs 0 <= LO <= HI")
    return recurrence.Box.cube(m, lo, hi)


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


# ----------------------------------------------------------------------------
# subcommands: each returns (input echo, result record, table text)


def cmd_f0(args):
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    b = counts_for(args, A)
    value = genfun.f0(A, lam, b, args.method)
    echo = {"matrix": A.rows, "lambda": None if lam is None else [q(x) for x in lam], "b": b}
    if isinstance(value, Poly):
        return echo, {"f0": render(value)}, f"F0{pt(b)} = {value}"
    if args.mode == "float":
        return echo, {"f0": {"float": fl(value)}}, f"F0{pt(b)} = {fl(value)}"
    return echo, {"f0": render(value)}, f"F0{pt(b)} = {q(value)} ~ {fl(value)}"


def cmd_prob(args):
    numeric_only(args)
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    b = counts_for(args, A)
    jp = genfun.prob_F(A, lam, b, args.method)
    echo = {"matrix": A.rows, "lambda": [q(x) for x in lam], "b": b}
    result = {"f0": q(jp.f0), "rate_sum": q(jp.rate_sum), "probability": fl(jp.value)}
    text = f"P(Y={pt(b)}) = {q(jp.f0)} * exp(-{q(jp.rate_sum)}) ~ {fl(jp.value)}"
    return echo, result, text


def cmd_moment(args):
    numeric_only(args)
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    b = counts_for(args, A)
    if args.j is None:
        raise UsageError("--j is required")
    law = genfun.ConditionalLaw(A, lam, b, args.method)
    j = _index(args.j, A.n, "--j")
    echo = {"matrix": A.rows, "lambda": [q(x) for x in lam], "b": b, "j": args.j}
    if args.i is not None:
        i = _index(args.i, A.n, "--i")
        if i == j:
            raise UsageError("--i and --j must differ; use --r 2 for the second factorial moment")
        value = law.mixed_factorial_moment(i, j)
        echo["i"] = args.i
        label = f"E[X{args.i} X{args.j} | Y={pt(b)}]"
    else:
        if args.r < 1:
            raise UsageError("--r must be >= 1")
        echo["r"] = args.r
        echo["kind"] = args.kind
        if args.kind == "raw":
            value = law.raw_moment(j, args.r)
            label = f"E[X{args.j}^{args.r} | Y={pt(b)}]"
        else:
            value = law.factorial_moment(j, args.r)
            label = f"E[X{args.j}^({args.r}) | Y={pt(b)}]"
    text = f"{label} = {fl(value)}" if args.mode == "float" else f"{label} = {q(value)} ~ {fl(value)}"
    return echo, {"moment": render(value)}, text


def _index(k: int, n: int, flag: str) -> int:
    if not 1 <= k <= n:
        raise UsageError(f"{flag} must lie in 1..{n}")
    return k - 1


def _matrix_table(rows, width=14) -> str:
    n = len(rows)
    head = " " * 4 + "".join(f"X{j + 1}".rjust(width) for j in range(n))
    lines = [head]
    for i, row in enumerate(rows):
        lines.append(f"X{i + 1}".ljust(4) + "".join(c.rjust(width) for c in row))
    return "\n".join(lines)


def _cor_cells(report):
    return [["undef" if c is None else fl(c) for c in row] for row in report.correlation]


def cmd_stats(args):
    numeric_only(args)
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    b = counts_for(args, A)
    rep = genfun.stats(A, lam, b, args.method)
    echo = {"matrix": A.rows, "lambda": [q(x) for x in lam], "b": b}
    result = {
        "f0": render(rep.f0),
        "means": [render(x) for x in rep.means],
        "variances": [render(x) for x in rep.variances],
        "covariance": [[q(x) for x in row] for row in rep.covariance],
        "correlation": [[None if c is None else fl(c) for c in row] for row in rep.correlation],
    }
    lines = [f"F0{pt(b)} = {q(rep.f0)}", ""]
    lines.append("var".ljust(5) + "mean".rjust(18) + "variance".rjust(18))
    for j, (mu, v) in enumerate(zip(rep.means, rep.variances)):
        lines.append(f"X{j + 1}".ljust(5) + fl(mu).rjust(18) + fl(v).rjust(18))
    lines += ["", "correlation", _matrix_table(_cor_cells(rep))]
    return echo, result, "\n".join(lines)


def cmd_cor(args):
    numeric_only(args)
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    b = counts_for(args, A)
    rep = genfun.stats(A, lam, b, args.method)
    echo = {"matrix": A.rows, "lambda": [q(x) for x in lam], "b": b}
    result = {"correlation": [[None if c is None else fl(c) for c in row] for row in rep.correlation]}
    return echo, result, _matrix_table(_cor_cells(rep))


# -- recurrences ---------------------------------------------------------------


def _recurrences_for(args):
    if args.rec is not None:
        data = json.loads(read_text(args.rec))
        data = data.get("result", {}).get("system", data)
        if "recurrences" in data:
            system = recurrence.RecurrenceSystem.from_dict(data)
            return system.A, list(system.recurrences), system.rates
        A = load_matrix(args.matrix)
        return A, [recurrence.PRecurrence.from_dict(data)], None
    if args.fixture is None:
        raise UsageError("give --fixture NAME or --rec FILE")
    if args.fixture == "two_row":
        A = load_matrix(args.matrix)
        return A, [two_row_printed_recurrence(A)], None
    if args.fixture not in FIXTURES:
        raise UsageError(f"unknown fixture {args.fixture!r}; choose from {', '.join(sorted(FIXTURES))}, two_row")
    fx = FIXTURES[args.fixture]
    return fx.A, list(fx.recurrences), None


def cmd_rec_verify(args):
    A, recs, fixed = _recurrences_for(args)
    if args.mode == "symbolic":
        lam = None
    elif args.lam is not None:
        lam = parse_rationals(args.lam, "lambda")
    elif fixed is not None:
        lam = list(fixed)
    else:
        raise UsageError("--lambda is required (or use --mode symbolic)")
    if lam is not None and len(lam) != A.n:
        raise UsageError(f"--lambda has {len(lam)} entries but the matrix has {A.n} columns")
    window = parse_window(args.window, A.m)
    outcomes = []
    lines = []
    for rec in recs:
        if args.direction is not None and rec.direction != args.direction - 1:
            continue
        res = recurrence.verify(rec, A, lam, window)
        entry = {"direction": rec.direction + 1, "passed": res.passed, "checked": res.checked}
        if not res.passed:
            entry["counterexample"] = res.counterexample
            entry["residual"] = str(res.residual) if isinstance(res.residual, Poly) else q(res.residual)
        outcomes.append(entry)
        verdict = "pass" if res.passed else f"FAIL at b={pt(res.counterexample)}"
        lines.append(f"direction {rec.direction + 1}: {verdict} ({res.checked} points)")
    echo = {"matrix": A.rows, "lambda": None if lam is None else [q(x) for x in lam], "window": args.window}
    failed = not all(o["passed"] for o in outcomes)
    return echo, {"verify": outcomes}, "\n".join(lines), failed


def cmd_rec_guess(args):
    numeric_only(args)
    A = load_matrix(args.matrix)
    lam = rates_for(args, A)
    directions = range(A.m) if args.direction is None else [_index(args.direction, A.m, "--direction")]
    recs = []
    for i in directions:
        rec = guess.minimal_fit(A, lam, i, args.max_order, args.max_degree)
        if rec is None:
            raise DomainFailure(
                f"no recurrence in direction {i + 1} with order <= {args.max_order}, degree <= {args.max_degree}"
            )
        recs.append(rec)
    echo = {"matrix": A.rows, "lambda": [q(x) for x in lam],
            "max_order": args.max_order, "max_degree": args.max_degree}
    if len(recs) == A.m:
        system = recurrence.RecurrenceSystem(A, recs, rates=lam)
        result = {"system": system.to_dict()}
    else:
        result = {"recurrences": [r.to_dict() for r in recs]}
    return echo, result, "\n".join(str(r) for r in recs)


def cmd_rec_eval(args):
    if args.rec is None:
        raise UsageError("--rec FILE is required")
    data = json.loads(read_text(args.rec))
    data = data.get("result", {}).get("system", data)
    system = recurrence.RecurrenceSystem.from_dict(data)
    lam = None
    if args.lam is not None:
        lam = parse_rationals(args.lam, "lambda")
    elif system.rates is None:
        raise UsageError("this recurrence system is symbolic in the rates; give --lambda")
    b = counts_for(args, system.A)
    stats = recurrence.MarchStats()
    value = recurrence.march(system, lam, b, stats)
    echo = {"matrix": system.A.rows, "b": b, "lambda": None if lam is None else [q(x) for x in lam]}
    result = {"f0": render(value), "steps": stats.steps, "max_live": stats.max_live,
              "reroutes": stats.reroutes, "direct": stats.direct}
    return echo, result, f"F0{pt(b)} = {q(value)} ~ {fl(value)}"


# -- reaction networks ---------------------------------------------------------


def _network(args) -> crn.ReactionNetwork:
    try:
        return crn.parse_network(read_text(args.network))
    except OSError as exc:
        raise UsageError(f"cannot read {args.network}: {exc.strerror}") from None


def _steady_state(args, net):
    if args.x is None:
        raise UsageError("--x is required")
    x = parse_rationals(args.x, "x")
    if len(x) != net.n:
        raise UsageError(f"--x has {len(x)} entries but the network has {net.n} species")
    if any(v <= 0 for v in x):
        raise UsageError("--x entries must be positive")
    return x


def cmd_crn_analyze(args):
    net = _network(args)
    rep = crn.analyze(net)
    return {"network": args.network, "species": net.species}, rep.to_dict(), str(rep)


def cmd_crn_balance(args):
    net = _network(args)
    x = _steady_state(args, net)
    res = crn.complex_balance_residuals(net, x)
    rows = [{"complex": net.format_complex(c), "residual": q(v)} for c, v in res.items()]
    lines = [f"{r['complex']}: {r['residual']}" for r in rows]
    ok = not any(res.values())
    lines.append("complex balanced" if ok else "not complex balanced")
    echo = {"network": args.network, "species": net.species, "x": [q(v) for v in x]}
    return echo, {"residuals": rows, "balanced": ok}, "\n".join(lines), not ok


def cmd_crn_conservation(args):
    net = _network(args)
    laws = crn.conservation_matrix(net)
    result = {"species": net.species, "rows": [list(r) for r in laws.rows], "nonnegative": laws.nonnegative}
    lines = ["  ".join(net.species)] + [" ".join(str(v) for v in r) for r in laws.rows]
    if not laws.nonnegative:
        lines.append("warning: no non-negative basis found; rows are a signed basis")
    return {"network": args.network}, result, "\n".join(lines)


def cmd_crn_cme_check(args):
    net = _network(args)
    x = _steady_state(args, net)
    checker = crn.SSCMEChecker(net, x)
    checked = 0
    bad = None
    for N in crn.lattice_box(net.n, args.radius):
        checked += 1
        res = checker.residual(N)
        if res:
            bad = (N, res)
            break
    echo = {"network": args.network, "x": [q(v) for v in x], "radius": args.radius}
    if bad is None:
        return echo, {"passed": True, "checked": checked}, f"ssCME residual 0 at all {checked} states", False
    result = {"passed": False, "checked": checked, "state": bad[0], "residual": q(bad[1])}
    return echo, result, f"nonzero ssCME residual {Fraction(bad[1])} at N={pt(bad[0])}", True


def cmd_crn_lemma_check(args):
    net = _network(args)
    x = _steady_state(args, net)
    rng = random.Random(args.seed)
    worst = None
    for t in range(args.count):
        alpha = crn.random_alpha(net, rng)
        res = crn.key_lemma_residual(net, x, alpha)
        if res and worst is None:
            worst = (t, res)
    echo = {"network": args.network, "x": [q(v) for v in x], "seed": args.seed, "count": args.count}
    if worst is None:
        return echo, {"passed": True, "trials": args.count}, f"residual 0 for all {args.count} random alpha", False
    result = {"passed": False, "trials": args.count, "first_failure": worst[0], "residual": q(worst[1])}
    return echo, result, f"nonzero residual {q(worst[1])} at trial {worst[0]}", True


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="condpoisson", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, matrix=True, lam=True, b=True):
        if matrix:
            sp.add_argument("--matrix", help="inline 'r1; r2; ...', a file, or a fixture name")
        if lam:
            sp.add_argument("--lambda", dest="lam", help="comma-separated rates (decimals or fractions)")
        if b:
            sp.add_argument("--b", help="comma-separated constraint counts")
        sp.add_argument("--mode", choices=("exact", "float", "symbolic"), default="exact")
        sp.add_argument("--out", choices=("table", "structured"), default="table")
        sp.add_argument("--method", choices=genfun.METHODS, default="product", help="F0 algorithm")

    common(sub.add_parser("f0", help="F0(b), exact or symbolic"))
    common(sub.add_parser("prob", help="P(Y = b)"))
    sp = sub.add_parser("moment", help="conditional factorial, raw or mixed moment")
    common(sp)
    sp.add_argument("--j", type=int, help="variable index (1-based)")
    sp.add_argument("--r", type=int, default=1, help="moment order")
    sp.add_argument("--i", type=int, help="second index for the mixed moment E[X_i X_j]")
    sp.add_argument("--kind", choices=("factorial", "raw"), default="factorial")
    common(sub.add_parser("stats", help="means, variances, covariances, correlations"))
    common(sub.add_parser("cor", help="correlation matrix"))

    rec = sub.add_parser("rec", help="P-recurrences").add_subparsers(dest="action", required=True)
    sp = rec.add_parser("verify", help="check recurrences against the generating function")
    common(sp, b=False)
    sp.add_argument("--fixture", help=f"one of {', '.join(sorted(FIXTURES))}, two_row")
    sp.add_argument("--rec", help="recurrence or system JSON (as printed by 'rec guess --out structured')")
    sp.add_argument("--window", default="1:15", help="LO:HI cube of b values")
    sp.add_argument("--direction", type=int, help="only this direction (1-based)")
    sp = rec.add_parser("guess", help="find recurrences from exact data")
    common(sp, b=False)
    sp.add_argument("--max-order", type=int, default=4)
    sp.add_argument("--max-degree", type=int, default=4)
    sp.add_argument("--direction", type=int, help="only this direction (1-based)")
    sp = rec.add_parser("eval", help="march a recurrence system to F0(b)")
    common(sp, matrix=False)
    sp.add_argument("--rec", help="system JSON file or - for stdin")

    net = sub.add_parser("crn", help="reaction networks").add_subparsers(dest="action", required=True)

    def netp(name, help_, x=False):
        sp = net.add_parser(name, help=help_)
        sp.add_argument("network", help="network file or - for stdin")
        sp.add_argument("--out", choices=("table", "structured"), default="table")
        if x:
            sp.add_argument("--x", help="positive steady-state vector")
        return sp

    netp("analyze", "complexes, linkage classes, rank, deficiency")
    netp("balance", "complex-balance residuals at --x", x=True)
    netp("conservation", "conservation laws")
    sp = netp("cme-check", "product-form ssCME residuals on a box", x=True)
    sp.add_argument("--radius", type=int, default=6)
    sp = netp("lemma-check", "Key Lemma residual for random functions on complexes", x=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=100)
    return p


HANDLERS = {
    "f0": cmd_f0, "prob": cmd_prob, "moment": cmd_moment, "stats": cmd_stats, "cor": cmd_cor,
    ("rec", "verify"): cmd_rec_verify, ("rec", "guess"): cmd_rec_guess, ("rec", "eval"): cmd_rec_eval,
    ("crn", "analyze"): cmd_crn_analyze, ("crn", "balance"): cmd_crn_balance,
    ("crn", "conservation"): cmd_crn_conservation, ("crn", "cme-check"): cmd_crn_cme_check,
    ("crn", "lemma-check"): cmd_crn_lemma_check,
}


def _jsonable(obj):
    if isinstance(obj, tuple):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, list):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, Fraction):
        return q(obj)
    return obj


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    key = args.command if args.command in HANDLERS else (args.command, args.action)
    name = key if isinstance(key, str) else " ".join(key)
    try:
        out = HANDLERS[key](args)
    except UsageError as exc:
        print(f"condpoisson {name}: {exc}", file=stderr)
        return 2
    except (NetworkSyntaxError, json.JSONDecodeError, KeyError, OSError) as exc:
        print(f"condpoisson {name}: {exc}", file=stderr)
        return 2
    except (NullConditioningError, ZeroDivisionError, DomainFailure) as exc:
        print(f"condpoisson {name}: {exc}", file=stderr)
        return 1
    except ValueError as exc:
        print(f"condpoisson {name}: {exc}", file=stderr)
        return 2
    echo, result, text = out[:3]
    failed = len(out) > 3 and out[3]
    if args.out == "structured":
        envelope = {"command": name, "input": _jsonable(echo), "result": _jsonable(result)}
        print(json.dumps(envelope, indent=2, sort_keys=True), file=stdout)
    else:
        print(text, file=stdout)
    return 1 if failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
