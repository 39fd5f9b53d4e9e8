"""Command-line front end: ``m0n <command> [options]``.

Every command produces a :class:`CommandResult`; ``--format json`` prints its
payload, ``--format text`` the human-readable rendering. Exit codes are
0 (ok), 2 (infeasible) and 1 (error).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from m0n.certsearch import (
    DEFAULT_M_MAX,
    all_fcurves,
    Certificate,
    CertificateProblem,
    builtin_certificates,
    find_certificate,
    verify_certificate,
)
from m0n.checks import CHECKS, run_checks
from m0n.core import (
    DimensionMismatchError,
    DivisorClass,
    FCurve,
    InvalidBoundaryError,
    class_equal,
    keel_relations,
    normal_form,
    pair_fcurve,
    picard_dimension,
)
from m0n.expr import ParseError, format_divisor, format_symmetric, parse_boundary_list, parse_curve, parse_divisor
from m0n.graphs import (
    InvalidWeightError,
    TreeError,
    WeightData,
    enumerate_strata,
    hassett_reduce,
    parse_tree,
    strata_count,
    tree_from_json,
    veronese_reduce,
)
from m0n.symmetric import (
    CurveClass,
    NotSymmetricError,
    SymmetricDivisor,
    TABLE_COLUMNS,
    TABLE_ROWS,
    as_symmetric,
    canonical_and_psi,
    chamber_lookup,
    fcurve_types,
    intersection_table,
    nef_check,
    pair_curve,
)

OK, INFEASIBLE, ERROR = "ok", "infeasible", "error"
EXIT_CODES = {OK: 0, INFEASIBLE: 2, ERROR: 1}


@dataclass
class CommandResult:
    status: str
    payload: Any
    human_text: str

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        return {"status": self.status, "result": self.payload}


class CommandError(Exception):
    def __init__(self, code: str, message: str, position: int | None = None) -> None:
        super().__init__(message)
        self.code = code
        self.message = message
        self.position = position


def rat(x: Fraction | int) -> int | str:
    """JSON form of a rational: bare integer or "p/q"."""
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def error_result(exc: Exception) -> CommandResult:
    if isinstance(exc, CommandError):
        code, msg, pos = exc.code, exc.message, exc.position
    elif isinstance(exc, ParseError):
        code, msg, pos = "parse_error", exc.message, exc.position
    else:
        code = {
            InvalidBoundaryError: "invalid_boundary",
            DimensionMismatchError: "dimension_mismatch",
            NotSymmetricError: "not_symmetric",
            InvalidWeightError: "invalid_weights",
            TreeError: "invalid_tree",
        }.get(type(exc), "invalid_argument")
        msg, pos = str(exc), None
    err: dict[str, Any] = {"code": code, "message": msg}
    if pos is not None:
        err["position"] = pos
    text = f"error [{code}]: {msg}" + (f" (position {pos})" if pos is not None else "")
    return CommandResult(ERROR, {"error": err}, text)


def _divisor(text: str, n: int) -> DivisorClass:
    return parse_divisor(text, n)


def _symmetric(text: str, n: int) -> SymmetricDivisor:
    return as_symmetric(_divisor(text, n))


# --------------------------------------------------------------------------
# commands

def cmd_pair(args) -> CommandResult:
    curve = parse_curve(args.curve, args.n)
    d = _divisor(args.divisor, args.n)
    if isinstance(curve, FCurve):
        value = pair_fcurve(curve, d)
    elif curve.kind == "fcurve":
        value = pair_fcurve(curve.representative(), d)
    else:
        value = pair_curve(curve, as_symmetric(d))
    return CommandResult(
        OK,
        {"curve": str(curve), "divisor": format_divisor(d), "value": rat(value)},
        str(rat(value)),
    )


def cmd_eq(args) -> CommandResult:
    a, b = _divisor(args.lhs, args.n), _divisor(args.rhs, args.n)
    equal = class_equal(a, b)
    # F-curves span N_1, so agreement on all of them is equality in N^1
    witness = next((f for f in all_fcurves(args.n) if pair_fcurve(f, a) != pair_fcurve(f, b)), None)
    payload = {"equal": equal, "numerically_equal": witness is None}
    text = "equal" if equal else "not equal"
    if witness is not None:
        payload["witness"] = str(witness)
        text += f" (differs on {witness})"
    elif not equal:
        text += " coordinate-wise; equal on every F-curve"
    return CommandResult(OK, payload, text)


def cmd_nf(args) -> CommandResult:
    d = normal_form(_divisor(args.divisor, args.n))
    text = format_divisor(d)
    payload = {
        "normal_form": text,
        "boundary": {str(b): rat(c) for b, c in d.boundary.items()},
        "psi": {str(i): rat(c) for i, c in d.psi.items()},
    }
    return CommandResult(OK, payload, text)


def cmd_relations(args) -> CommandResult:
    basis = keel_relations(args.n)
    payload: dict[str, Any] = {
        "n": args.n,
        "boundary_classes": len(basis.columns),
        "relations": len(basis.relations),
        "rank": basis.rank,
        "quotient_dimension": basis.quotient_dimension,
        "expected_dimension": picard_dimension(args.n),
    }
    lines = [f"{k}: {v}" for k, v in payload.items() if k != "n"]
    if args.list:
        payload["list"] = [format_divisor(r) for r in basis.relations]
        lines += payload["list"]
    return CommandResult(OK, payload, "\n".join(lines))


def _table(n: int) -> tuple[list[str], list[str], list[list[Fraction]]]:
    if n == 7:
        return list(TABLE_ROWS), list(TABLE_COLUMNS), intersection_table(7)
    k, psi = canonical_and_psi(n)
    cols = ["psi", "K"] + [f"B{i}" for i in range(2, n // 2 + 1)]
    divs = [psi, k] + [SymmetricDivisor.basis(n, i) for i in range(2, n // 2 + 1)]
    curves: list[CurveClass] = list(fcurve_types(n))
    rows = [str(c) for c in curves]
    return rows, cols, [[pair_curve(c, d) for d in divs] for c in curves]


def cmd_table(args) -> CommandResult:
    rows, cols, values = _table(args.n)
    cells = [[str(rat(v)) for v in row] for row in values]
    width = max(len(x) for x in rows + cols + [c for r in cells for c in r]) + 2
    lines = ["".ljust(width) + "".join(c.rjust(width) for c in cols)]
    for name, row in zip(rows, cells):
        lines.append(name.ljust(width) + "".join(c.rjust(width) for c in row))
    payload = {"rows": rows, "columns": cols, "values": [[rat(v) for v in row] for row in values]}
    return CommandResult(OK, payload, "\n".join(lines))


def cmd_chamber(args) -> CommandResult:
    if args.n != 7:
        raise CommandError("unsupported_n", "chamber lookup is implemented for n = 7 only")
    s = _symmetric(args.divisor, 7)
    rep = chamber_lookup(s)
    label = rep.model_label + (" (wall)" if rep.on_wall else "")
    lines = [
        f"divisor: {format_symmetric(s)}",
        f"chamber: {rep.chamber_id} {rep.interval}",
        f"model: {label}",
        f"stable base locus: {rep.stable_base_locus}",
    ]
    if rep.adjacent_models:
        lines.append("adjacent models: " + ", ".join(rep.adjacent_models))
    payload = rep.to_json() | {"ray": [rat(c) for c in s.coeffs]}
    return CommandResult(OK, payload, "\n".join(lines))


def cmd_nef(args) -> CommandResult:
    s = _symmetric(args.divisor, args.n)
    values = {str(c): pair_curve(c, s) for c in fcurve_types(args.n)}
    nef = nef_check(s)
    payload = {"nef": nef, "fcurve_pairings": {k: rat(v) for k, v in values.items()}}
    lines = ["nef" if nef else "not nef"] + [f"  {k}: {rat(v)}" for k, v in values.items()]
    return CommandResult(OK, payload, "\n".join(lines))


def _builtin(k: int):
    entries = builtin_certificates()
    if not 1 <= k <= len(entries):
        raise CommandError("unknown_builtin", f"builtin must be between 1 and {len(entries)}")
    return entries[k - 1]


def _problem(args) -> CertificateProblem:
    if args.builtin is not None:
        return _builtin(args.builtin).problem
    if args.target is None:
        raise CommandError("missing_argument", "give --target or --builtin")
    forbid = frozenset(parse_boundary_list(args.forbid, args.n)) if args.forbid else frozenset()
    return CertificateProblem(
        args.n, _divisor(args.target, args.n), forbid,
        require_integral=args.integral, allow_multiple=args.allow_multiple, m_max=args.mmax,
    )


def _cert_text(cert: Certificate) -> str:
    head = f"multiple: {cert.multiple}"
    if not cert.coeffs:
        return head
    n = next(iter(cert.coeffs)).n
    return head + "\n" + format_divisor(DivisorClass(n, cert.coeffs))


def cmd_cert(args) -> CommandResult:
    problem = _problem(args)
    if args.action == "find":
        found = find_certificate(problem)
        if not found:
            return CommandResult(INFEASIBLE, {"reason": found.reason}, f"infeasible: {found.reason}")
        report = verify_certificate(problem, found)
        payload = {"certificate": found.to_json(), "verification": report.to_json()}
        return CommandResult(OK, payload, _cert_text(found) + f"\nverified: {report.verdict}")
    # verify
    if args.certificate is not None:
        data = json.loads(Path(args.certificate).read_text())
        cert = Certificate.from_json(data, problem.n)
    elif args.builtin is not None:
        cert = _builtin(args.builtin).certificate
    else:
        raise CommandError("missing_argument", "verify needs --builtin or --certificate FILE")
    report = verify_certificate(problem, cert)
    lines = [f"verdict: {report.verdict}"]
    lines += [f"{k}: {v}" for k, v in report.to_json().items() if isinstance(v, bool) and k != "verdict"]
    for c, x, y in report.failing_fcurves[:5]:
        lines.append(f"witness {c}: certificate {x}, target {y}")
    return CommandResult(OK, report.to_json(), "\n".join(lines))


def _weights(args, n: int) -> WeightData:
    parts = [p for p in args.weights.replace(" ", "").split(",") if p]
    values: list[Fraction] = []
    for p in parts:
        if "x" in p:
            w, _, k = p.partition("x")
            values += [Fraction(w)] * int(k)
        else:
            values.append(Fraction(p))
    if len(values) == 1:
        values *= n
    return WeightData(tuple(values), Fraction(args.gamma), args.d)


def cmd_reduce(args) -> CommandResult:
    source = args.tree
    text = sys.stdin.read() if source == "-" else Path(source).read_text()
    tree = tree_from_json(json.loads(text)) if text.lstrip().startswith("{") else parse_tree(text)
    w = _weights(args, tree.n)
    report = hassett_reduce(tree, w) if args.mode == "hassett" else veronese_reduce(tree, w)
    lines = [report.result.to_text()]
    for vs, why in report.contracted:
        lines.append(f"contracted {{{','.join(sorted(vs))}}}: {why}")
    if report.sigma_values:
        lines.append("sigma: " + ", ".join(f"{v}={s}" for v, s in report.to_json()["sigma_values"].items()))
    return CommandResult(OK, report.to_json(), "\n".join(lines))


def cmd_strata(args) -> CommandResult:
    strata = enumerate_strata(args.n, args.i)
    payload: dict[str, Any] = {"n": args.n, "i": args.i, "count": len(strata), "formula": strata_count(args.n, args.i)}
    lines = [f"count: {len(strata)}"]
    if args.list:
        payload["strata"] = [[list(p) for p in s] for s in strata]
        lines += [" ".join(f"{{{a},{b}}}" for a, b in s) for s in strata]
    return CommandResult(OK, payload, "\n".join(lines))


def cmd_verify_paper(args) -> CommandResult:
    results = run_checks(args.only or None, jobs=args.jobs, seed=args.seed)
    lines = []
    for r in results:
        lines.append(r.line())
        lines += [f"    {f}" for f in r.failures]
    passed = sum(r.ok for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    payload = {"checks": [r.to_json() for r in results], "passed": passed, "total": len(results)}
    if passed != len(results):
        failed = [r.check_id for r in results if not r.ok]
        payload["error"] = {"code": "checks_failed", "message": "failed: " + ", ".join(failed)}
        return CommandResult(ERROR, payload, "\n".join(lines))
    return CommandResult(OK, payload, "\n".join(lines))


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=argparse.SUPPRESS, help="number of marked points (default 7)")
    common.add_argument("--format", choices=("text", "json"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized checks")

    parser = argparse.ArgumentParser(prog="m0n", description="Divisor and curve calculus on M_{0,n}.")
    parser.add_argument("--n", type=int, default=7)
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    p = add("pair", cmd_pair, "intersection number of a curve and a divisor")
    p.add_argument("--curve", required=True)
    p.add_argument("--divisor", required=True)

    p = add("eq", cmd_eq, "test equality of two divisor classes")
    p.add_argument("--lhs", required=True)
    p.add_argument("--rhs", required=True)

    p = add("nf", cmd_nf, "normal form modulo Keel relations")
    p.add_argument("--divisor", required=True)

    p = add("relations", cmd_relations, "Keel relation basis statistics")
    p.add_argument("--list", action="store_true", help="print the relations")

    add("table", cmd_table, "symmetric intersection table")

    p = add("chamber", cmd_chamber, "birational model and base locus of a symmetric divisor (n=7)")
    p.add_argument("--divisor", required=True)

    p = add("nef", cmd_nef, "nefness of a symmetric divisor")
    p.add_argument("--divisor", required=True)

    p = add("cert", cmd_cert, "find or verify an effective boundary certificate")
    p.add_argument("action", choices=("find", "verify"))
    p.add_argument("--target")
    p.add_argument("--forbid", default="", help='e.g. "B{1,2},B{3,4,5}"')
    p.add_argument("--builtin", type=int)
    p.add_argument("--certificate", help="certificate JSON file (verify)")
    p.add_argument("--integral", dest="integral", action="store_true", default=True)
    p.add_argument("--rational", dest="integral", action="store_false", help="accept rational coefficients")
    p.add_argument("--no-multiple", dest="allow_multiple", action="store_false", default=True)
    p.add_argument("--mmax", type=int, default=DEFAULT_M_MAX)

    p = add("reduce", cmd_reduce, "Hassett or Veronese reduction of a dual tree")
    p.add_argument("--tree", required=True, help="tree file (text or JSON), or - for stdin")
    p.add_argument("--weights", required=True, help='e.g. "1/3" or "1/3x7" or "1,1,1/2,..."')
    p.add_argument("--gamma", default="0")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--mode", choices=("hassett", "veronese"), default="hassett")

    p = add("strata", cmd_strata, "intersections of i distinct B_2 components")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--list", action="store_true")

    p = add("verify-paper", cmd_verify_paper, "run the embedded verification suite")
    p.add_argument("--only", nargs="*", choices=sorted(CHECKS), default=None)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def run(argv: Sequence[str] | None = None) -> CommandResult:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ValueError, KeyError, OSError) as exc:
        if isinstance(exc, OSError):
            exc = CommandError("io_error", str(exc))
        elif isinstance(exc, KeyError):
            exc = CommandError("invalid_argument", str(exc))
        return error_result(exc)


def main(argv: Sequence[str] | None = None) -> int:
    args_list = list(sys.argv[1:] if argv is None else argv)
    fmt = _peek_format(args_list)
    try:
        result = run(args_list)
    except SystemExit as exc:  # argparse usage error
        code = exc.code if isinstance(exc.code, int) else 1
        if code == 0:
            return 0
        if fmt == "json":
            print(json.dumps({"status": ERROR, "result": {"error": {"code": "usage", "message": "bad arguments"}}}))
        return 1
    if fmt == "json":
        print(json.dumps(result.to_json(), ensure_ascii=False, indent=2))
    elif result.status == ERROR and "checks" not in result.payload:
        print(result.human_text, file=sys.stderr)
    else:
        print(result.human_text)
    return result.exit_code


def _peek_format(argv: Sequence[str]) -> str:
    fmt = "text"
    for k, a in enumerate(argv):
        if a == "--format" and k + 1 < len(argv):
            fmt = argv[k + 1]
        elif a.startswith("--format="):
            fmt = a.split("=", 1)[1]
    return fmt


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
