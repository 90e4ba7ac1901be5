import io

import pytest
from hypothesis import given, strategies as st

from assocverify.ontology import (
    Ontology,
    OntologyError,
    OntologyPrefixError,
    SynonymScope,
    load_obo,
    lookup_by_id,
    normalize,
    parse_obo,
)

HTN_STANZA = """[Term]
id: DOID:10763
name: hypertension
synonym: "HTN" EXACT []
synonym: "hyperpiesia" EXACT []
synonym: "hypertensive disease" RELATED []
synonym: "vascular hypertensive disorder" EXACT []
"""


def test_hypertension_stanza():
    onto = parse_obo(io.StringIO(HTN_STANZA), "DOID")
    term = onto.terms["DOID:10763"]
    assert term.name == "hypertension"
    assert [s.text for s in term.synonyms] == [
        "HTN", "hyperpiesia", "hypertensive disease", "vascular hypertensive disorder",
    ]
    assert [s.scope for s in term.synonyms] == [
        SynonymScope.EXACT, SynonymScope.EXACT, SynonymScope.RELATED, SynonymScope.EXACT,
    ]


def test_empty_input():
    onto = parse_obo(io.StringIO(""), "DOID")
    assert len(onto) == 0
    assert onto.name_index == {} and onto.synonym_index == {}


def test_committed_fixture_counts(doid):
    # 25 [Term] stanzas, 2 of them obsolete, plus one [Typedef]
    assert len(doid.terms) == 25
    assert sum(t.obsolete for t in doid.terms.values()) == 2
    assert len(doid.name_index) == 23
    assert doid.warnings == ()


def test_typedef_skipped(doid):
    assert "has_symptom" not in doid.terms


def test_obsolete_not_indexed(doid):
    obsolete = [t for t in doid.terms.values() if t.obsolete]
    for t in obsolete:
        assert normalize(t.name) not in doid.name_index
        for s in t.synonyms:
            assert t.id not in doid.synonym_index.get(normalize(s.text), ())


def test_index_soundness(doid):
    for key, ids in doid.name_index.items():
        for i in ids:
            assert normalize(doid.terms[i].name) == key
    for key, ids in doid.synonym_index.items():
        for i in ids:
            assert key in {normalize(s.text) for s in doid.terms[i].synonyms}


def test_rebuild_is_identical(doid):
    again = doid.rebuilt()
    assert dict(again.name_index) == dict(doid.name_index)
    assert dict(again.synonym_index) == dict(doid.synonym_index)


def test_parse_twice_equal(fixtures_dir):
    a = load_obo(fixtures_dir / "doid.obo", "DOID")
    b = load_obo(fixtures_dir / "doid.obo", "DOID")
    assert a == b
    assert a.checksum == b.checksum


def test_stanza_without_id_is_warned():
    text = "[Term]\nname: orphan\n\n" + HTN_STANZA + "\n[Term]\nid: not-an-id\nname: x\n"
    onto = parse_obo(io.StringIO(text), "DOID")
    assert list(onto.terms) == ["DOID:10763"]
    assert len(onto.warnings) == 2


def test_unknown_scope_is_unspecified():
    text = '[Term]\nid: DOID:1\nname: a\nsynonym: "b" WEIRD []\nsynonym: "c"\n'
    term = parse_obo(io.StringIO(text), "DOID").terms["DOID:1"]
    assert [s.scope for s in term.synonyms] == [SynonymScope.UNSPECIFIED] * 2


def test_unreadable_stream():
    class Broken:
        def __iter__(self):
            raise OSError("disk on fire")

    with pytest.raises(OntologyError):
        parse_obo(Broken(), "DOID")
    with pytest.raises(OntologyError):
        load_obo("/nonexistent/file.obo", "DOID")


def test_prefix_mismatch(fixtures_dir):
    with pytest.raises(OntologyPrefixError, match="DOID"):
        load_obo(fixtures_dir / "symp.obo", "DOID")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("Hypertension", "hypertension"),
        ("bull's-eye  Rash", "bulls eye rash"),
        ("", ""),
        ("Type II, diabetes/NIDDM.", "type ii diabetes niddm"),
        ("  Parkinson’s   disease ", "parkinsons disease"),
    ],
)
def test_normalize(text, expected):
    assert normalize(text) == expected


@given(st.text())
def test_normalize_idempotent(text):
    once = normalize(text)
    assert normalize(once) == once


def test_lookup_by_id(doid):
    assert lookup_by_id(doid, "DOID:10763").name == "hypertension"
    assert lookup_by_id(doid, "DOID:99999999") is None
    assert lookup_by_id(doid, "DOID:1342").id == "DOID:10763"
    assert lookup_by_id(doid, "DOID:1342 ") is None
    assert lookup_by_id(doid, "DOID:10763 ") is None


def test_from_terms_roundtrip(doid):
    same = Ontology.from_terms("DOID", doid.terms.values())
    assert dict(same.name_index) == dict(doid.name_index)
