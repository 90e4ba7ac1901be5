import io
import json
import random

import pytest
from hypothesis import given, strategies as st

from assocverify.assoc import (
    AssociationKind,
    AssociationRecord,
    DatasetShapeError,
    DatasetSyntaxError,
    Provenance,
    TermRef,
    dedup,
    derive_process_gene_pairs,
    load_dataset,
    parse_associations,
    serialize_associations,
    write_dataset,
)
from assocverify.ontology import normalize

DS = AssociationKind.DISEASE_SYMPTOM
DD = AssociationKind.DISEASE_DRUG
DG = AssociationKind.DISEASE_GENE


def test_asthma_shortness_of_breath():
    doc = ('[{"disease_id":"DOID:2841","disease":"Asthma",'
           '"symptom_id":"SYMPTOM:1003","symptom":"Shortness of Breath"}]')
    result = parse_associations(doc, DS)
    assert result.accepted_count == 1 and result.rejected_count == 0
    rec = result.records[0]
    assert rec.source == TermRef("DOID:2841", "Asthma")
    assert rec.target == TermRef("SYMPTOM:1003", "Shortness of Breath")


def test_empty_array():
    result = parse_associations("[]", DS)
    assert (result.accepted_count, result.rejected_count) == (0, 0)


def test_two_missing_symptoms():
    elements = [
        {"disease_id": f"DOID:{i}", "disease": f"d{i}", "symptom_id": f"SYMP:{i}", "symptom": f"s{i}"}
        for i in range(10)
    ]
    del elements[3]["symptom"]
    del elements[7]["symptom"]
    result = parse_associations(json.dumps(elements), DS)
    assert result.accepted_count == 8
    assert result.rejected_count == 2
    assert {r.reason for r in result.rejected} == {"missing field: symptom"}
    assert "d3" in result.rejected[0].raw


def test_wrapper_object_and_flat_adapter():
    doc = {"associations": [{"DOID:11734": "Epistaxis", "SYMPTOM:1080": "Nosebleed"}]}
    rec = parse_associations(json.dumps(doc), DS).records[0]
    assert rec.source == TermRef("DOID:11734", "Epistaxis")
    assert rec.target == TermRef("SYMPTOM:1080", "Nosebleed")
    # key order does not decide which side is the disease
    flat = '{"SYMPTOM:1080": "Nosebleed", "DOID:11734": "Epistaxis"}'
    assert parse_associations(flat, DS).records == [rec]


def test_wrong_types_rejected():
    doc = '[{"disease": 5, "symptom": "x"}, "text", {"disease": "  ", "symptom": "y"}]'
    result = parse_associations(doc, DS)
    assert [r.reason for r in result.rejected] == [
        "wrong type for field: disease", "element is not an object", "empty field: disease",
    ]


def test_syntax_error_byte_offset():
    doc = '[{"disease": "Ménière"}, oops]'
    with pytest.raises(DatasetSyntaxError) as err:
        parse_associations(doc, DS)
    # é and è take two bytes each
    assert err.value.byte_offset == doc.index("oops") + 2
    assert "byte offset" in str(err.value)


def test_shape_error():
    with pytest.raises(DatasetShapeError):
        parse_associations('{"a": 1, "b": 2}', DS)
    with pytest.raises(DatasetShapeError):
        parse_associations('"just a string"', DS)


def test_disease_gene_requires_process():
    doc = [
        {"disease_id": "DOID:9351", "disease": "Hypertension", "go_id": "GO:0002027",
         "go_process": "Blood Pressure Regulation", "gene": "ACE"},
        {"disease": "Asthma", "gene": "IL4"},
    ]
    result = parse_associations(json.dumps(doc), DG)
    assert result.records[0].gene_symbol == "ACE"
    assert result.records[0].go_process == TermRef("GO:0002027", "Blood Pressure Regulation")
    assert result.rejected[0].reason == "missing field: go_process"


def test_non_gene_records_reject_gene_fields():
    with pytest.raises(ValueError):
        AssociationRecord(DD, TermRef("", "a"), TermRef("", "b"), gene_symbol="ACE")


def _rec(kind, s, t, sid="", tid=""):
    return AssociationRecord(kind, TermRef(sid, s), TermRef(tid, t))


def test_dedup_ignores_ids():
    a = _rec(DD, "Asthma", "Zidovudine", "DOID:2841", "ChEBI:10177")
    b = _rec(DD, "asthma", "zidovudine", "DOID:1", "CHEBI:10110")
    unique, dups = dedup([a, b])
    assert unique == [a] and dups == 1


def test_dedup_distinct():
    recs = [_rec(DD, "a", "x"), _rec(DD, "b", "x"), _rec(DD, "a", "y")]
    assert dedup(recs) == (recs, 0)


def test_dedup_mixed_kinds():
    with pytest.raises(ValueError):
        dedup([_rec(DD, "a", "b"), _rec(DS, "a", "b")])


def _synthetic_symptom_records(n=5466, seed=7):
    rng = random.Random(seed)
    diseases = [f"Disease {i}" for i in range(300)]
    symptoms = [f"symptom-{i}" for i in range(120)]
    out = []
    for _ in range(n):
        d = rng.choice(diseases)
        s = rng.choice(symptoms)
        # vary surface form so normalization has to do the work
        if rng.random() < 0.3:
            d = d.upper()
        if rng.random() < 0.3:
            s = s.replace("-", " ")
        out.append(_rec(DS, d, s, f"DOID:{rng.randrange(99999)}"))
    return out


def test_dedup_matches_pairwise_oracle():
    records = _synthetic_symptom_records()
    unique, dups = dedup(records)

    labels = [(normalize(r.source.label), normalize(r.target.label)) for r in records]
    # quadratic oracle: a record survives iff no earlier record has equal labels
    keep = [r for i, r in enumerate(records)
            if not any(labels[i] == labels[j] for j in range(i))]
    assert unique == keep
    assert dups == len(records) - len(keep)


def test_derive_process_gene():
    rec = AssociationRecord(
        DG, TermRef("DOID:9351", "Hypertension"), TermRef("", "ACE"),
        gene_symbol="ACE", go_process=TermRef("GO:0002027", "Blood Pressure Regulation"),
    )
    pairs, skipped = derive_process_gene_pairs([rec])
    assert skipped == 0
    assert pairs[0].kind is AssociationKind.PROCESS_GENE
    assert pairs[0].source == TermRef("GO:0002027", "Blood Pressure Regulation")
    assert pairs[0].target == TermRef("", "ACE")
    assert derive_process_gene_pairs([]) == ([], 0)
    unique, _ = dedup(derive_process_gene_pairs([rec, rec, rec])[0])
    assert len(unique) == 1


def test_derive_skips_incomplete():
    rec = AssociationRecord(DG, TermRef("", "x"), TermRef("", "ACE"), gene_symbol="ACE")
    assert derive_process_gene_pairs([rec]) == ([], 1)


labels = st.text(st.characters(blacklist_categories=("Cs",)), min_size=1).filter(str.strip)


@given(st.lists(st.tuples(st.sampled_from(list(AssociationKind)), labels, labels, labels)))
def test_roundtrip(items):
    records = []
    for kind, s, t, extra in items:
        if kind is DG:
            records.append(AssociationRecord(kind, TermRef("X:1", s), TermRef("", t),
                                             gene_symbol=t, go_process=TermRef("GO:1", extra)))
        else:
            records.append(AssociationRecord(kind, TermRef("X:1", s), TermRef("Y:2", t),
                                             provenance=Provenance("m", None, extra)))
    by_kind = {}
    for r in records:
        by_kind.setdefault(r.kind, []).append(r)
    for kind, recs in by_kind.items():
        again = parse_associations(serialize_associations(recs), kind)
        assert again.records == recs and not again.rejected


@given(st.lists(st.tuples(labels, labels), max_size=30))
def test_dedup_idempotent(pairs):
    recs = [_rec(DD, s, t) for s, t in pairs]
    once, _ = dedup(recs)
    assert dedup(once) == (once, 0)


@given(st.lists(st.one_of(
    st.fixed_dictionaries({"disease": labels, "drug": labels}),
    st.fixed_dictionaries({"disease": labels}),
    st.integers(),
), max_size=20))
def test_counts_sum(elements):
    result = parse_associations(json.dumps(elements), DD)
    assert result.accepted_count + result.rejected_count == len(elements)


def test_write_and_load_dataset(tmp_path):
    recs = [_rec(DD, "Asthma", "Salbutamol")]
    mpath = write_dataset(tmp_path / "d.json", recs, DD, model_name="m", batch_id="b")
    assert json.loads(mpath.read_text())["record_count"] == 1
    kind, result, sha = load_dataset(tmp_path / "d.json")
    assert kind is DD and result.records[0].target.label == "Salbutamol" and len(sha) == 64


def test_parse_accepts_stream():
    assert parse_associations(io.StringIO("[]"), DD).records == []
