"""Command-line interface: ``jetflows <command> [--family F] [--base B] ...``.

Exit status 0 means success or a passed verification, 1 a failed
verification (nonzero residual), 2 a usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import catalog
from .densities import (
    RHO3, check_conserved, density_ansatz, nontrivial_instances, rho1,
)
from .grading import level_monomials, partition_matrix
from .hierarchy import (
    FlowRecord, NotProportional, apply_recursion, commutator, generate_hierarchy, listed_flows,
    potentiate, printed_operator, recursion_operator, seed_flow,
)
from .jetcalc import Family, JetContext, UnsupportedContext, frechet
from .parsing import ParseError, parse, to_latex
from .ring import to_text
from .solver import Inconsistent, derive_recursion_coefficients

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_MAX_FLOW = {Family.KDV: 9, Family.SKK: 13}


class UsageError(Exception):
    pass


class Output:
    """Collects one document in all three renderings and writes the requested one."""

    def __init__(self, args):
        self.fmt = args.format
        self.out = args.out
        self.text: list = []
        self.latex: list = []
        self.doc: dict = {}

    def emit(self):
        if self.fmt == "json":
            body = catalog.dumps(self.doc)
        elif self.fmt == "latex":
            body = "\n".join(self.latex or self.text) + "\n"
        else:
            body = "\n".join(self.text) + "\n"
        if self.out:
            Path(self.out).write_text(body)
        else:
            sys.stdout.write(body)


def _family(args) -> Family:
    return Family.parse(args.family)


def _ctx(args) -> JetContext:
    return JetContext(args.base, _family(args), args.jet_limit)


def _max_flow(args) -> int:
    return args.max_order if args.max_order is not None else DEFAULT_MAX_FLOW[_family(args)]


def _flows(args, up_to: int) -> dict:
    fam = _family(args)
    R = printed_operator(fam, args.base) if args.printed else recursion_operator(fam, args.base)
    return {f.order: f for f in generate_hierarchy(fam, args.base, up_to, R, args.jet_limit)}


def _flow_lines(f: FlowRecord) -> list:
    return [f"u_t,{f.order} = {to_text(f.rhs)}"]


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_partitions(args, out: Output) -> int:
    if args.n < 1:
        raise UsageError("partitions need N >= 1")
    rows = partition_matrix(args.n)
    out.text = [" ".join(map(str, r)) for r in rows]
    out.doc = {"n": args.n, "count": len(rows), "partitions": rows}
    body = " \\\\\n".join(" & ".join(map(str, r)) for r in rows)
    out.latex = [f"P_{{{args.n}}} = \\left[\\begin{{array}}{{{'c' * args.n}}}\n{body}\n\\end{{array}}\\right]"]
    return EXIT_OK


def cmd_level_monomials(args, out: Output) -> int:
    if args.n < 1 or args.b < 0:
        raise UsageError("level-monomials need B >= 0 and N >= 1")
    mons = [lm.to_poly() for lm in level_monomials(args.b, args.n)]
    out.text = [to_text(m) for m in mons]
    out.doc = {"base": args.b, "level": args.n, "count": len(mons), "monomials": out.text}
    out.latex = [to_latex(m, args.b) for m in mons]
    return EXIT_OK


def _emit_flows(flows: list, out: Output):
    out.text = [line for f in flows for line in _flow_lines(f)]
    out.latex = [catalog.flow_to_latex(f) for f in flows]
    out.doc = catalog.catalog_to_json(flows)


def cmd_seed(args, out: Output) -> int:
    _emit_flows([seed_flow(_family(args), args.base)], out)
    return EXIT_OK


def _verify_flows(flows: list, ctx: JetContext) -> dict:
    report = {"commutators": {}, "conservation": {}}
    orders = [f.order for f in flows]
    for i, f in enumerate(flows):
        for g in flows[i + 1:]:
            r = commutator(f, g, ctx.max_order)
            report["commutators"][f"{f.order},{g.order}"] = to_text(r)
        for name, rho in (("rho-1", parse("a^-1")), ("rho1", rho1(ctx))):
            res = check_conserved(rho, f.rhs, ctx)
            report["conservation"][f"{name}@{f.order}"] = to_text(res.residual)
    report["ok"] = all(v == "0" for part in ("commutators", "conservation") for v in report[part].values())
    report["orders"] = orders
    return report


def cmd_hierarchy(args, out: Output) -> int:
    flows = list(_flows(args, _max_flow(args)).values())
    _emit_flows(flows, out)
    if args.no_verify:
        return EXIT_OK
    report = _verify_flows(flows, _ctx(args))
    out.doc["verification"] = report
    out.text.append("verification: " + ("ok" if report["ok"] else "FAILED"))
    for k, v in report["commutators"].items():
        if v != "0":
            out.text.append(f"  commutator {k}: nonzero")
    for k, v in report["conservation"].items():
        if v != "0":
            out.text.append(f"  conservation {k}: nonzero")
    return EXIT_OK if report["ok"] else EXIT_FAIL


def cmd_apply_r(args, out: Output) -> int:
    fam = _family(args)
    flows = _flows(args, args.order)
    if args.order not in flows:
        raise UsageError(f"no order-{args.order} flow in the {fam.value} b={args.base} hierarchy "
                         f"(available: {sorted(flows)})")
    R = printed_operator(fam, args.base) if args.printed else recursion_operator(fam, args.base)
    g = apply_recursion(R, flows[args.order], args.jet_limit)
    listed = listed_flows(fam, args.base).get(g.order)
    match = None if listed is None else (listed.rhs == g.rhs)
    _emit_flows([g], out)
    out.doc["scale"] = str(g.provenance.scale)
    out.doc["matches_listing"] = match
    out.text.append(f"scale: {g.provenance.scale}")
    if match is not None:
        out.text.append("matches listed flow: " + ("yes" if match else "NO"))
    return EXIT_FAIL if match is False else EXIT_OK


def cmd_commutator(args, out: Output) -> int:
    try:
        m1, m2 = (int(x) for x in args.orders.split(","))
    except ValueError:
        raise UsageError("--orders expects two integers, e.g. 5,7") from None
    flows = _flows(args, max(m1, m2))
    missing = [m for m in (m1, m2) if m not in flows]
    if missing:
        raise UsageError(f"orders {missing} are not in the hierarchy (available: {sorted(flows)})")
    r = commutator(flows[m1], flows[m2], args.jet_limit)
    out.text = [to_text(r)]
    out.doc = {"orders": [m1, m2], "residual": catalog.poly_to_json(r), "zero": r.is_zero()}
    out.latex = [to_latex(r, args.base)]
    return EXIT_OK if r.is_zero() else EXIT_FAIL


def cmd_check_density(args, out: Output) -> int:
    ctx = _ctx(args)
    fam = _family(args)
    flows = list(_flows(args, _max_flow(args)).values())
    if args.rho in ("-1", "1"):
        rho = parse("a^-1") if args.rho == "-1" else rho1(ctx)
        results = {f.order: check_conserved(rho, f.rhs, ctx) for f in flows}
        ok = all(r.conserved for r in results.values())
        out.text = [f"rho = {to_text(rho)}"] + [
            f"order {m}: " + ("conserved" if r.conserved else "NOT conserved") for m, r in results.items()
        ]
        out.doc = {"rho": to_text(rho), "results": {
            str(m): {"conserved": r.conserved, "flux": to_text(r.flux) if r.flux is not None else None,
                     "residual": to_text(r.residual)} for m, r in results.items()}}
        return EXIT_OK if ok else EXIT_FAIL
    # rho^(3): nontrivial for KdV, trivial for SKK
    F = next(f for f in flows if f.order >= 5)
    box = dict(a_range=(0, 12), ab_range=(0, 4), p_range=(0, 1)) if fam is Family.KDV else {}
    found = nontrivial_instances(density_ansatz(RHO3, ctx, **box), F.rhs, ctx)
    expect_nontrivial = fam is Family.KDV
    out.text = [f"flow order {F.order}: {len(found)} nontrivial conserved instance(s)"] + [to_text(r) for r in found]
    out.doc = {"flow_order": F.order, "nontrivial": [to_text(r) for r in found],
               "expected_nontrivial": expect_nontrivial}
    return EXIT_OK if bool(found) == expect_nontrivial else EXIT_FAIL


def cmd_potentiate(args, out: Output) -> int:
    fam = _family(args)
    if args.order is None:
        f = seed_flow(fam, args.base)
    else:
        f = _flows(args, args.order).get(args.order) or listed_flows(fam, args.base).get(args.order)
        if f is None:
            raise UsageError(f"no order-{args.order} flow at base {args.base}")
    g = potentiate(f)
    _emit_flows([g], out)
    target = seed_flow(fam, g.base) if args.order is None else listed_flows(fam, g.base).get(g.order)
    match = None if target is None else target.rhs == g.rhs
    out.doc["matches"] = match
    if match is not None:
        out.text.append(f"matches base-{g.base} flow: " + ("yes" if match else "NO"))
    return EXIT_FAIL if match is False else EXIT_OK


def _operator_lines(R) -> list:
    lines = [f"R^({k}) = {to_text(c)}" for k, c in sorted(R.op.local.items(), reverse=True)]
    for i, (s, g) in enumerate(R.op.nonlocal_terms, start=1):
        lines.append(f"sigma^({i}) = {to_text(s)}")
    return lines


def cmd_derive_r(args, out: Output) -> int:
    d = derive_recursion_coefficients(_family(args), args.base, args.jet_limit)
    out.text = _operator_lines(d.operator)
    out.text.append(f"scales: {', '.join(f'{m}: {c}' for m, c in d.scales.items())}")
    out.text.append(f"equations: {d.equations}, unknowns: {d.unknowns}, consistent: {d.consistent}")
    out.text.append(f"errata: {len(d.errata)}")
    for e in d.errata:
        out.text += [f"  {e.item}", f"    printed: {e.printed}", f"    derived: {e.derived}"]
    out.doc = {
        "family": d.operator.family.value, "base": d.operator.base,
        "local": {str(k): to_text(c) for k, c in sorted(d.operator.op.local.items(), reverse=True)},
        "sigma": [to_text(s) for s, _ in d.operator.op.nonlocal_terms],
        "scales": {str(m): str(c) for m, c in d.scales.items()},
        "consistent": d.consistent,
        **catalog.errata_to_json(d.errata),
    }
    if args.errata:
        Path(args.errata).write_text(catalog.dumps(catalog.errata_to_json(d.errata)))
    return EXIT_OK if d.consistent else EXIT_FAIL


def cmd_frechet(args, out: Output) -> int:
    ctx = _ctx(args)
    e = parse(args.expr)
    op = frechet(e, ctx)
    items = sorted(op.local.items(), reverse=True)
    out.text = [f"D^{k}: {to_text(c)}" for k, c in items]
    out.doc = {"expr": to_text(e), "coefficients": {str(k): to_text(c) for k, c in items}}
    out.latex = [f"D^{{{k}}}: {to_latex(c, args.base)}" for k, c in items]
    return EXIT_OK


def cmd_verify_catalog(args, out: Output) -> int:
    try:
        flows = catalog.read_catalog(args.path)
    except catalog.ChecksumMismatch as exc:
        out.text = [f"checksum mismatch: {exc}"]
        out.doc = {"ok": False, "error": str(exc)}
        return EXIT_FAIL
    groups: dict = {}
    for f in flows:
        groups.setdefault((f.family, f.base), []).append(f)
    ok = True
    out.doc = {"checksums": [catalog.checksum(f) for f in flows], "groups": {}}
    for (fam, b), fs in groups.items():
        rep = _verify_flows(fs, JetContext(b, fam, args.jet_limit))
        ok &= rep["ok"]
        out.doc["groups"][f"{fam.value}/{b}"] = rep
        out.text.append(f"{fam.value} b={b}: orders {rep['orders']} " + ("ok" if rep["ok"] else "FAILED"))
    out.doc["ok"] = ok
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", choices=["kdv", "skk"], default="skk")
    common.add_argument("--base", type=int, choices=[3, 4, 5], default=3)
    common.add_argument("--max-order", type=int, default=None,
                        help="highest flow order to generate (default: 9 for kdv, 13 for skk)")
    common.add_argument("--format", choices=["text", "json", "latex"], default="text")
    common.add_argument("--out", metavar="PATH", help="write the document here instead of stdout")
    common.add_argument("--jet-limit", type=int, default=40, help="maximum jet order (default 40)")
    common.add_argument("--printed", action="store_true",
                        help="use the recursion operator as tabulated instead of the re-derived one")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="jetflows", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("partitions", cmd_partitions, "partitions of N as a multiplicity matrix")
    sp.add_argument("n", type=int)
    sp = add("level-monomials", cmd_level_monomials, "monomials of level N above base B")
    sp.add_argument("b", type=int)
    sp.add_argument("n", type=int)
    add("seed", cmd_seed, "the seed flow of a (family, base)")
    sp = add("hierarchy", cmd_hierarchy, "generate, verify and emit the flow catalog")
    sp.add_argument("--no-verify", action="store_true")
    sp = add("apply-r", cmd_apply_r, "apply the recursion operator to the order-M flow")
    sp.add_argument("--order", type=int, required=True)
    sp = add("commutator", cmd_commutator, "commutator of two flows")
    sp.add_argument("--orders", required=True, help="two orders, e.g. 5,7")
    sp = add("check-density", cmd_check_density, "conservation of a canonical density")
    sp.add_argument("--rho", choices=["-1", "1", "3"], required=True)
    sp = add("potentiate", cmd_potentiate, "potentiate a flow one base level down")
    sp.add_argument("--order", type=int, default=None, help="flow order (default: the seed)")
    sp = add("derive-r", cmd_derive_r, "re-derive the recursion operator and list errata")
    sp.add_argument("--errata", metavar="PATH", help="also write the errata file here")
    sp = add("frechet", cmd_frechet, "Frechet derivative coefficients of an expression")
    sp.add_argument("--expr", required=True)
    sp = add("verify-catalog", cmd_verify_catalog, "re-verify a JSON catalog and its checksums")
    sp.add_argument("path")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Output(args)
    try:
        if args.command not in ("partitions", "level-monomials", "verify-catalog"):
            JetContext(args.base, _family(args), args.jet_limit)  # reject unsupported pairs early
        code = args.func(args, out)
    except (UnsupportedContext, UsageError, ParseError) as exc:
        print(f"jetflows: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (Inconsistent, NotProportional) as exc:
        print(f"jetflows: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
