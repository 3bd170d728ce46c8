"""JSON catalog of flows, errata files and LaTeX export."""
from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path

from .hierarchy import FlowRecord, Provenance
from .jetcalc import Family
from .parsing import symbol_for, to_latex
from .ring import DiffPoly, key_exponents, to_text

FORMAT_VERSION = 1


def _sym_name(sym) -> str:
    return str(sym)


def poly_to_json(e: DiffPoly) -> list:
    out = []
    for k in e.sorted_keys():
        c = e.data[k]
        exps = {_sym_name(s): x for s, x in key_exponents(k).items()}
        out.append({"coeff": str(c), "exps": dict(sorted(exps.items()))})
    return out


def poly_from_json(terms: list) -> DiffPoly:
    acc = {}
    for t in terms:
        exps = {symbol_for(name): int(x) for name, x in t["exps"].items()}
        p = DiffPoly.monomial(Fraction(t["coeff"]), exps)
        acc.update({k: acc.get(k, 0) + v for k, v in p.data.items()})
    return DiffPoly._wrap({k: v for k, v in acc.items() if v})


def checksum(rec: FlowRecord) -> str:
    """SHA-256 over family, base, order and the canonical text of the right-hand side."""
    payload = f"{rec.family.value}|{rec.base}|{rec.order}|{to_text(rec.rhs)}"
    return hashlib.sha256(payload.encode()).hexdigest()


def flow_to_json(rec: FlowRecord) -> dict:
    return {
        "family": rec.family.value,
        "base": rec.base,
        "order": rec.order,
        "rhs": poly_to_json(rec.rhs),
        "provenance": rec.provenance.to_json(),
        "checksum": checksum(rec),
    }


class ChecksumMismatch(ValueError):
    pass


def flow_from_json(d: dict, verify: bool = True) -> FlowRecord:
    rec = FlowRecord(int(d["order"]), Family.parse(d["family"]), int(d["base"]),
                     poly_from_json(d["rhs"]), Provenance.from_json(d.get("provenance", {"kind": "seed"})))
    if verify and "checksum" in d and d["checksum"] != checksum(rec):
        raise ChecksumMismatch(f"order-{rec.order} record does not match its checksum")
    return rec


def catalog_to_json(records: list) -> dict:
    return {"version": FORMAT_VERSION, "flows": [flow_to_json(r) for r in records]}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_catalog(records: list, path) -> None:
    Path(path).write_text(dumps(catalog_to_json(records)))


def read_catalog(path) -> list:
    doc = json.loads(Path(path).read_text())
    return [flow_from_json(d) for d in doc["flows"]]


def errata_to_json(errata: list) -> dict:
    return {"version": FORMAT_VERSION, "errata": [e.to_json() for e in errata]}


def flow_to_latex(rec: FlowRecord) -> str:
    return f"u_t = {to_latex(rec.rhs, rec.base)}"
