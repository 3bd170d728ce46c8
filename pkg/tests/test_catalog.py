import json
from pathlib import Path

import pytest

from jetflows import catalog
from jetflows.hierarchy import generate_hierarchy, listed_flows
from jetflows.parsing import from_latex, to_latex
from jetflows.solver import derive_recursion_coefficients

PAIRS = [("kdv", 3), ("skk", 3), ("skk", 4), ("skk", 5)]
ROOT = Path(__file__).resolve().parent.parent


@pytest.mark.parametrize("fam,b", PAIRS)
def test_json_round_trip_keeps_checksums(fam, b, tmp_path):
    flows = generate_hierarchy(fam, b, 11)
    path = tmp_path / "cat.json"
    catalog.write_catalog(flows, path)
    back = catalog.read_catalog(path)
    assert [catalog.checksum(f) for f in back] == [catalog.checksum(f) for f in flows]
    assert [f.rhs for f in back] == [f.rhs for f in flows]
    assert [f.provenance for f in back] == [f.provenance for f in flows]


def test_json_schema_and_determinism():
    flows = list(listed_flows("skk", 5).values())
    doc = catalog.catalog_to_json(flows)
    rec = doc["flows"][0]
    assert set(rec) == {"family", "base", "order", "rhs", "provenance", "checksum"}
    assert rec["rhs"] == [{"coeff": "1/2", "exps": {"a": 6, "ab": -1}}]
    assert catalog.dumps(doc) == catalog.dumps(catalog.catalog_to_json(flows))


def test_tampered_record_fails_checksum(tmp_path):
    flows = list(listed_flows("skk", 4).values())
    doc = catalog.catalog_to_json(flows)
    doc["flows"][1]["rhs"][0]["coeff"] = "2"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(catalog.ChecksumMismatch):
        catalog.read_catalog(path)


@pytest.mark.parametrize("fam,b", PAIRS)
def test_latex_re_parses_to_same_polynomial(fam, b):
    for f in listed_flows(fam, b).values():
        assert from_latex(to_latex(f.rhs, b), b) == f.rhs
        assert catalog.flow_to_latex(f).startswith("u_t = ")


def test_shipped_errata_file_is_current():
    errata = [e for fam, b in PAIRS for e in derive_recursion_coefficients(fam, b).errata]
    shipped = json.loads((ROOT / "errata.json").read_text())
    assert shipped == catalog.errata_to_json(errata)
