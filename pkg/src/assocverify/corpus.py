"""Abstract corpora (JSONL) and publication-period bucketing."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

logger = logging.getLogger(__name__)

__all__ = [
    "AbstractDoc",
    "Corpus",
    "CorpusError",
    "DEFAULT_PERIODS",
    "OUT_OF_RANGE",
    "Period",
    "PeriodSpec",
    "bucket_by_period",
    "load_corpus",
    "load_corpus_file",
    "write_corpus",
]

OUT_OF_RANGE = "out_of_range"
MIN_YEAR, MAX_YEAR = 1800, 2100


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class AbstractDoc:
    doc_id: str
    title: str
    body: str
    year: int

    @property
    def text(self) -> str:
        """Match text: title and body joined by a space."""
        return f"{self.title} {self.body}"

    def to_json(self) -> dict:
        return {"doc_id": self.doc_id, "title": self.title, "body": self.body, "year": self.year}


@dataclass(frozen=True)
class Corpus:
    docs: tuple[AbstractDoc, ...]
    source_checksum: str = ""
    skipped_malformed: int = 0
    skipped_duplicate: int = 0

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)


def _parse_line(line: str) -> AbstractDoc:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("not an object")
    doc_id = obj.get("doc_id")
    if isinstance(doc_id, bool) or not isinstance(doc_id, (str, int)) or str(doc_id) == "":
        raise ValueError("bad doc_id")
    body = obj.get("body", obj.get("abstract"))
    if not isinstance(body, str):
        raise ValueError("missing body")
    title = obj.get("title", "")
    if not isinstance(title, str):
        raise ValueError("bad title")
    year = obj.get("year")
    if isinstance(year, bool) or not isinstance(year, int) or not MIN_YEAR <= year <= MAX_YEAR:
        raise ValueError("bad year")
    return AbstractDoc(str(doc_id), title, body, year)


def load_corpus(stream: IO[str] | Iterable[str]) -> Corpus:
    """Read one JSON object per line (``doc_id``, ``title``, ``body`` or
    ``abstract``, ``year``). Malformed lines and repeated ids are skipped and
    counted; a read failure raises :class:`CorpusError`."""
    digest = hashlib.sha256()
    docs: list[AbstractDoc] = []
    seen: set[str] = set()
    malformed = duplicate = 0
    try:
        for lineno, line in enumerate(stream, start=1):
            digest.update(line.encode("utf-8"))
            if not line.strip():
                continue
            try:
                doc = _parse_line(line)
            except ValueError as exc:
                malformed += 1
                logger.debug("line %d skipped: %s", lineno, exc)
                continue
            if doc.doc_id in seen:
                duplicate += 1
                continue
            seen.add(doc.doc_id)
            docs.append(doc)
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read corpus: {exc}") from exc
    if malformed or duplicate:
        logger.warning("corpus: skipped %d malformed and %d duplicate lines", malformed, duplicate)
    return Corpus(tuple(docs), digest.hexdigest(), malformed, duplicate)


def load_corpus_file(path: str | Path) -> Corpus:
    try:
        with open(path, encoding="utf-8") as fh:
            return load_corpus(fh)
    except OSError as exc:
        raise CorpusError(f"cannot open {path}: {exc}") from exc


def write_corpus(path: str | Path, docs: Iterable[AbstractDoc]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_json(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class Period:
    label: str
    start_year: int
    end_year: int

    def __contains__(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year


@dataclass(frozen=True)
class PeriodSpec:
    """Ordered, non-overlapping, inclusive year ranges."""

    periods: tuple[Period, ...]

    def __post_init__(self):
        prev_end = None
        for p in self.periods:
            if p.start_year > p.end_year:
                raise ValueError(f"period {p.label}: start after end")
            if prev_end is not None and p.start_year <= prev_end:
                raise ValueError(f"period {p.label} overlaps or is out of order")
            prev_end = p.end_year
        labels = [p.label for p in self.periods]
        if len(set(labels)) != len(labels) or OUT_OF_RANGE in labels:
            raise ValueError("period labels must be unique and not 'out_of_range'")

    @classmethod
    def from_ranges(cls, ranges: Iterable[tuple[int, int]]) -> "PeriodSpec":
        return cls(tuple(Period(f"{a}–{b}", a, b) for a, b in ranges))

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.periods]

    def period_of(self, year: int) -> str:
        for p in self.periods:
            if year in p:
                return p.label
        return OUT_OF_RANGE


DEFAULT_PERIODS = PeriodSpec.from_ranges([(2009, 2014), (2015, 2019), (2020, 2024)])


def bucket_by_period(corpus: Corpus, spec: PeriodSpec = DEFAULT_PERIODS) -> dict[str, Corpus]:
    """Split a corpus by publication year. Every period gets a bucket (maybe
    empty) and docs outside all periods land in ``out_of_range``."""
    buckets: dict[str, list[AbstractDoc]] = {label: [] for label in spec.labels}
    buckets[OUT_OF_RANGE] = []
    for doc in corpus.docs:
        buckets[spec.period_of(doc.year)].append(doc)
    return {
        label: Corpus(tuple(docs), corpus.source_checksum) for label, docs in buckets.items()
    }
