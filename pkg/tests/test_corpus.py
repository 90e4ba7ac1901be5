import io
import json
import random

import pytest
from hypothesis import given, strategies as st

from assocverify.corpus import (
    DEFAULT_PERIODS,
    OUT_OF_RANGE,
    AbstractDoc,
    Corpus,
    CorpusError,
    PeriodSpec,
    bucket_by_period,
    load_corpus,
    load_corpus_file,
    write_corpus,
)


def _lines(*objs):
    return io.StringIO("".join((o if isinstance(o, str) else json.dumps(o)) + "\n" for o in objs))


def test_load_basic_and_abstract_alias():
    c = load_corpus(_lines(
        {"doc_id": "A", "title": "T", "body": "b", "year": 2010},
        {"doc_id": 7, "abstract": "alias body", "year": 2021},
    ))
    assert [d.doc_id for d in c] == ["A", "7"]
    assert c.docs[1].body == "alias body" and c.docs[1].title == ""
    assert c.docs[0].text == "T b"


@pytest.mark.parametrize("bad", [
    "not json",
    "[1, 2]",
    {"title": "no id", "body": "x", "year": 2010},
    {"doc_id": "x", "year": 2010},
    {"doc_id": "x", "body": "b", "year": "2010"},
    {"doc_id": "x", "body": "b", "year": 1492},
    {"doc_id": True, "body": "b", "year": 2010},
])
def test_malformed_lines_are_counted(bad):
    c = load_corpus(_lines(bad, {"doc_id": "ok", "body": "b", "year": 2010}))
    assert len(c) == 1 and c.skipped_malformed == 1


def test_duplicates_first_wins():
    c = load_corpus(_lines(
        {"doc_id": "A", "body": "first", "year": 2010},
        {"doc_id": "A", "body": "second", "year": 2011},
    ))
    assert len(c) == 1 and c.docs[0].body == "first" and c.skipped_duplicate == 1


def test_ten_thousand_lines_with_planted_duplicates(tmp_path):
    rng = random.Random(3)
    docs = [AbstractDoc(f"D{i}", "", "text", rng.randint(2000, 2024)) for i in range(9900)]
    lines = [json.dumps(d.to_json()) for d in docs]
    dups = [json.dumps({**docs[i].to_json(), "body": "dup"}) for i in rng.sample(range(5000), 100)]
    # each repeat lands after its original
    lines[5000:5000] = dups[:50]
    lines += dups[50:]
    assert len(lines) == 10000
    path = tmp_path / "c.jsonl"
    path.write_text("\n".join(lines) + "\n")
    c = load_corpus_file(path)
    assert len(c) == 9900 and c.skipped_duplicate == 100
    assert all(d.body == "text" for d in c)


def test_write_roundtrip(tmp_path):
    docs = [AbstractDoc("1", "Ménière", "body", 2012), AbstractDoc("2", "", "x", 2020)]
    write_corpus(tmp_path / "c.jsonl", docs)
    assert load_corpus_file(tmp_path / "c.jsonl").docs == tuple(docs)


def test_missing_file():
    with pytest.raises(CorpusError):
        load_corpus_file("/nonexistent/corpus.jsonl")


def test_checksum_tracks_content():
    a = load_corpus(_lines({"doc_id": "A", "body": "b", "year": 2010}))
    b = load_corpus(_lines({"doc_id": "A", "body": "c", "year": 2010}))
    assert a.source_checksum != b.source_checksum


@pytest.mark.parametrize("year,label", [
    (2009, "2009–2014"), (2014, "2009–2014"), (2015, "2015–2019"),
    (2019, "2015–2019"), (2020, "2020–2024"), (2024, "2020–2024"),
    (2008, OUT_OF_RANGE), (2025, OUT_OF_RANGE),
])
def test_period_boundaries(year, label):
    assert DEFAULT_PERIODS.period_of(year) == label


def test_buckets_always_present():
    b = bucket_by_period(Corpus(()))
    assert list(b) == DEFAULT_PERIODS.labels + [OUT_OF_RANGE]
    assert all(len(v) == 0 for v in b.values())


@pytest.mark.parametrize("ranges", [[(2010, 2009)], [(2000, 2010), (2010, 2020)], [(2015, 2019), (2009, 2014)]])
def test_invalid_period_specs(ranges):
    with pytest.raises(ValueError):
        PeriodSpec.from_ranges(ranges)


@given(st.lists(st.integers(1800, 2100), max_size=60))
def test_bucketing_is_a_partition(years):
    corpus = Corpus(tuple(AbstractDoc(str(i), "", "", y) for i, y in enumerate(years)))
    buckets = bucket_by_period(corpus)
    ids = [d.doc_id for b in buckets.values() for d in b]
    assert sorted(ids) == sorted(d.doc_id for d in corpus)
    for label, b in buckets.items():
        assert all(DEFAULT_PERIODS.period_of(d.year) == label for d in b)
