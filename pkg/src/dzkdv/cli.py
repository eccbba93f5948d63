"""Command-line front end.

Exit codes: 0 on success, 1 when an identity fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from .exact import Rational
from .frobenius import FrobeniusModel, ModelError, bundled_model, load_model
from .identities import IdentityReport, _is_point, check_a21, check_aop_single, check_genus1, check_universal
from .intersection import UnstableError, cache_path, default_table
from .loop import all_partitions, kdv_free_energies
from .potential import PotentialParseError
from .trees import enumerate_q, enumerate_trees, tree_coefficient

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_MAX_GENUS = 4
FORMATS = ("text", "json", "latex")


class InputError(Exception):
    pass


def _frac(q) -> str:
    q = Rational(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"expected a list of integers, got {text!r}") from None


def resolve_model(name: str | None) -> FrobeniusModel:
    """A model file path, or the name of a bundled model (``point``, ``a2``, ``a3``)."""
    if name is None:
        return bundled_model("point")
    path = Path(name)
    try:
        if path.is_file():
            return load_model(path)
        stem = path.stem if path.suffix == ".frob" else name
        if path.parent == Path(".") and stem in ("point", "a2", "a3"):
            return bundled_model(stem)
    except (PotentialParseError, ModelError) as exc:
        raise InputError(f"{name}: {exc}") from None
    raise InputError(f"model file not found: {name}")


# commands -----------------------------------------------------------------------
def cmd_kdv(args, out) -> int:
    g = args.genus
    if not 1 <= g <= args.max_genus:
        raise InputError(f"genus must be in 1..{args.max_genus}")
    fe = kdv_free_energies(g)[g]
    table = sorted(fe.coeffs.items(), key=lambda kv: (len(kv[0]), tuple(kv[0])))
    if args.format == "json":
        terms = [{"partition": list(mu), "coefficient": _frac(c)} for mu, c in table]
        out.write(json.dumps({"genus": g, "terms": terms}) + "\n")
    elif args.format == "latex":
        if g == 1:
            out.write("\\frac{1}{24}\\log v^{1,1}\n")
        else:
            out.write(fe.as_diffpoly().to_latex() + "\n")
    else:
        out.write(("1/24 * log(v[1,1])" if g == 1 else str(fe.as_diffpoly())) + "\n")
        for mu, c in table:
            out.write(f"C[{g};{','.join(map(str, mu))}] = {_frac(c)}\n")
    return EXIT_OK


def _verify_jobs(model: FrobeniusModel, selection: set[str], max_genus: int) -> list[Callable[[], IdentityReport]]:
    jobs: list[Callable[[], IdentityReport]] = []
    point = model.N == 1
    if "genus1" in selection:
        for p in range(1, 6):
            for a in model.indices():
                jobs.append(lambda a=a, p=p: check_genus1(model, a, p))
    if "universal" in selection:
        for a in model.indices():
            jobs.append(lambda a=a: check_universal(model, 1, (1,), [a]))
        if point:
            for g in range(2, max_genus + 1):
                for mu in all_partitions(g):
                    jobs.append(lambda g=g, mu=mu: check_universal(model, g, mu))
    if "aop" in selection and point:
        for g, p in [(2, 4), (2, 5), (2, 6), (3, 7)]:
            if g <= max_genus:
                jobs.append(lambda g=g, p=p: check_aop_single(model, g, 1, p))
        if max_genus >= 2:
            for p1, p2 in [(2, 3), (3, 4)]:
                jobs.append(lambda p1=p1, p2=p2: check_a21(model, p1, p2))
    return jobs


def cmd_verify(args, out) -> int:
    model = resolve_model(args.model)
    if args.max_genus < 1:
        raise InputError("--max-genus must be >= 1")
    if model.N == 1 and not _is_point(model) and args.max_genus > 1:
        raise InputError("higher-genus checks need the potential v1^3/6")
    selection = {s for s in ("genus1", "universal", "aop") if getattr(args, s)}
    if args.all or not selection:
        selection = {"genus1", "universal", "aop"}
    reports = [job() for job in _verify_jobs(model, selection, args.max_genus)]
    failed = [r for r in reports if not r.equal]
    if args.format == "json":
        out.write(json.dumps([r.to_dict() for r in reports], sort_keys=True) + "\n")
    else:
        for r in reports:
            out.write(r.to_text() + "\n")
        out.write(f"{len(reports) - len(failed)}/{len(reports)} identities hold\n")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_intersect(args, out) -> int:
    ks = _int_list(args.ks)
    if any(k < 0 for k in ks):
        raise InputError("psi exponents must be nonnegative")
    path = cache_path()
    if path is not None:
        default_table.load(path)
    try:
        val = default_table(args.genus, ks)
    except UnstableError as exc:
        raise InputError(str(exc)) from None
    if path is not None:
        default_table.save(path)
    if args.format == "json":
        out.write(json.dumps({"genus": args.genus, "ks": ks, "value": _frac(val)}) + "\n")
    elif args.format == "latex":
        taus = "".join(f"\\tau_{{{k}}}" for k in ks)
        out.write(f"\\langle {taus} \\rangle_{{{args.genus}}} = {_latex_frac(val)}\n")
    else:
        out.write(_frac(val) + "\n")
    return EXIT_OK


def _latex_frac(q) -> str:
    q = Rational(q)
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return f"{sign}\\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"


def _default_a(n: int, chi: int) -> list[int]:
    base, extra = divmod(chi, n)
    return [base + (1 if i < extra else 0) for i in range(n)]


def cmd_trees(args, out) -> int:
    if args.n < 1 or args.chi < 0:
        raise InputError("need n >= 1 and chi >= 0")
    a = _int_list(args.a) if args.a else _default_a(args.n, args.chi)
    if len(a) != args.n or sum(a) != args.chi or any(x < 0 for x in a):
        raise InputError("--a needs n nonnegative entries summing to chi")
    rows = []
    for tree in enumerate_trees(args.n):
        qs = []
        for q in enumerate_q(tree, args.chi):
            c = tree_coefficient(tree, q, a)
            if not c:
                continue
            label = {f"{k}{x}": val for (k, x), val in q.items()}
            qs.append({"q": label, "coefficient": _frac(c)})
        rows.append({"tree": tree.describe(), "edges": len(tree.edges), "assignments": qs})
    if args.format == "json":
        out.write(json.dumps({"n": args.n, "chi": args.chi, "a": a, "trees": rows}) + "\n")
    else:
        out.write(f"{len(rows)} trees, n={args.n}, chi={args.chi}, a={a}\n")
        for row in rows:
            out.write(f"{row['tree']}\n")
            for qa in row["assignments"]:
                qs = " ".join(f"{k}={x}" for k, x in qa["q"].items())
                out.write(f"  {qs}: {qa['coefficient']}\n")
    return EXIT_OK


def cmd_correlator(args, out) -> int:
    model = resolve_model(args.model)
    ins = []
    for chunk in args.insertions.split(";"):
        pair = _int_list(chunk)
        if len(pair) != 2:
            raise InputError(f"insertion {chunk!r} is not 'alpha,p'")
        ins.append(tuple(pair))
    try:
        val = model.correlator(ins)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.format == "json":
        out.write(json.dumps({"insertions": [list(x) for x in ins], "value": str(val)}) + "\n")
    elif args.format == "latex":
        out.write(val.to_latex() + "\n")
    else:
        out.write(str(val) + "\n")
    return EXIT_OK


# parser -------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dzkdv", description="Exact free energies and universal identities.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=FORMATS, default="text")

    p = sub.add_parser("kdv", help="KdV free energy F_g and its coefficient table")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--max-genus", type=int, default=DEFAULT_MAX_GENUS)
    common(p)
    p.set_defaults(func=cmd_kdv)

    p = sub.add_parser("verify", help="check the universal identities on a model")
    p.add_argument("--model", help="model file or bundled name (default: point)")
    p.add_argument("--max-genus", type=int, default=3)
    p.add_argument("--all", action="store_true")
    p.add_argument("--genus1", action="store_true")
    p.add_argument("--universal", action="store_true")
    p.add_argument("--aop", action="store_true")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("intersect", help="psi-class intersection number")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--ks", required=True, help="exponents, e.g. '4' or '2,3'")
    common(p)
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("trees", help="stable rooted trees with q-assignments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chi", type=int, required=True)
    p.add_argument("--a", help="a_1..a_n (default: chi split evenly)")
    common(p)
    p.set_defaults(func=cmd_trees)

    p = sub.add_parser("correlator", help="genus-0 correlator on the jet space")
    p.add_argument("--model", help="model file or bundled name (default: point)")
    p.add_argument("--insertions", required=True, help="e.g. '1,0;1,0;1,0'")
    common(p)
    p.set_defaults(func=cmd_correlator)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
