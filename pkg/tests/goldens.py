"""Fixed report inputs and golden-file comparison.

Set ``ASSOCVERIFY_REGEN_GOLDEN=1`` to rewrite the golden files instead of
comparing; inspect the diff before committing.
"""

import hashlib
import json
import os
from pathlib import Path

from assocverify.assoc import AssociationKind, load_dataset
from assocverify.cooccur import CoverageRow
from assocverify.genharness import ConsistencyRow
from assocverify.ontology import load_obo
from assocverify.report import emit_consistency, emit_coverage, emit_term_accuracy
from assocverify.termverify import AccuracyRow, TermAccuracyReport, load_gene_lexicon, verify_dataset

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"
REPORT_INPUTS = FIXTURES / "report_inputs.json"

_CATEGORY_KIND = {
    "DOID-ChEBI associations": AssociationKind.DISEASE_DRUG,
    "DOID-SYMP associations": AssociationKind.DISEASE_SYMPTOM,
    "DOID-GO associations": AssociationKind.DISEASE_GENE,
}


def inputs_checksum() -> str:
    return hashlib.sha256(REPORT_INPUTS.read_bytes()).hexdigest()


def _inputs() -> dict:
    return json.loads(REPORT_INPUTS.read_text(encoding="utf-8"))


def term_reports() -> list[TermAccuracyReport]:
    by_cat: dict[str, list[AccuracyRow]] = {}
    for r in _inputs()["term_accuracy"]:
        by_cat.setdefault(r["category"], []).append(AccuracyRow(**r))
    return [TermAccuracyReport(_CATEGORY_KIND[c], rows) for c, rows in by_cat.items()]


def coverage_rows() -> list[CoverageRow]:
    return [
        CoverageRow(AssociationKind(r["kind"]), r["period"], r["record_count"],
                    r["verified_count"], r["total_frequency"], r["corpus_size"])
        for r in _inputs()["coverage"]
    ]


def consistency_rows() -> list[ConsistencyRow]:
    return [
        ConsistencyRow(r["model"], AssociationKind(r["kind"]), r["hit_count"], r["denominator"])
        for r in _inputs()["consistency"]
    ]


def fixture_term_reports() -> list[TermAccuracyReport]:
    ontologies = {p: load_obo(FIXTURES / f"{p.lower()}.obo", p)
                  for p in ("DOID", "SYMP", "CHEBI", "GO")}
    lexicon = load_gene_lexicon(FIXTURES / "genes.txt")
    out = []
    for name in ("drug_dataset", "symptom_dataset", "gene_dataset"):
        _, result, _ = load_dataset(FIXTURES / f"{name}.json")
        out.append(verify_dataset(result.records, ontologies, lexicon))
    return out


def renderings() -> dict[str, bytes]:
    """Every golden file name mapped to freshly rendered bytes."""
    cs = inputs_checksum()
    out = {}
    for ext, fmt in (("csv", "csv"), ("md", "markdown")):
        out[f"term_accuracy.{ext}"] = emit_term_accuracy(term_reports(), fmt, cs)
        out[f"coverage.{ext}"] = emit_coverage(coverage_rows(), fmt, cs)
        out[f"consistency.{ext}"] = emit_consistency(consistency_rows(), fmt, cs)
        out[f"fixture_term_accuracy.{ext}"] = emit_term_accuracy(fixture_term_reports(), fmt, cs)
    return out


def check_golden(name: str, data: bytes) -> None:
    path = GOLDEN / name
    if os.environ.get("ASSOCVERIFY_REGEN_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        path.write_bytes(data)
        return
    assert path.exists(), f"golden file {name} missing; regenerate with ASSOCVERIFY_REGEN_GOLDEN=1"
    assert data == path.read_bytes(), f"{name} differs from golden"
