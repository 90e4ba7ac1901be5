"""Association verification by co-occurrence in abstract corpora.

Two engines share one contract. :func:`verify_associations_naive` is the
nested loop (every record against every document) and stays as the
reference. :func:`verify_associations_indexed` answers the same question
from an :class:`OccurrenceIndex` built in one pass per document, and must
return exactly the same hits.

Matching is on whole normalized tokens: a pattern matches a document when its
token sequence appears contiguously in the document's token sequence. There
is no stemming, so "hypertensive" does not match "hypertension".
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .assoc import AssociationKind, AssociationRecord
from .corpus import Corpus
from .ontology import Ontology, normalize
from .termverify import DEFAULT_PREFIXES, Role, verify_term

logger = logging.getLogger(__name__)

__all__ = [
    "AssociationHit",
    "CoverageRow",
    "IndexMismatchError",
    "OccurrenceIndex",
    "PatternResolver",
    "TermPattern",
    "build_index",
    "coverage_stats",
    "doc_contains",
    "tokenize",
    "verify_associations_indexed",
    "verify_associations_naive",
]

SAMPLE_CAP = 20
_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    """Maximal runs of letters/digits in the normalized text."""
    return _TOKEN_RE.findall(normalize(text))


@dataclass(frozen=True)
class TermPattern:
    primary: str
    alternates: tuple[str, ...] = ()

    def __post_init__(self):
        for s in self.strings:
            if not s or normalize(s) != s:
                raise ValueError(f"pattern string {s!r} is not normalized and non-empty")

    @classmethod
    def from_label(cls, label: str, alternates: Iterable[str] = ()) -> "TermPattern":
        primary = normalize(label)
        alts = sorted({normalize(a) for a in alternates} - {primary, ""})
        return cls(primary, tuple(alts))

    @property
    def strings(self) -> tuple[str, ...]:
        return (self.primary, *self.alternates)


def _padded(text: str) -> str:
    return " " + " ".join(tokenize(text)) + " "


def _phrase(pattern_string: str) -> str | None:
    toks = _TOKEN_RE.findall(pattern_string)
    return " " + " ".join(toks) + " " if toks else None


def _contains_padded(padded_doc: str, pattern: TermPattern) -> bool:
    for s in pattern.strings:
        phrase = _phrase(s)
        if phrase is not None and phrase in padded_doc:
            return True
    return False


def doc_contains(doc_text: str, pattern: TermPattern) -> bool:
    """True iff the primary or any alternate occurs as a whole-token phrase."""
    return _contains_padded(_padded(doc_text), pattern)


Resolver = Callable[[AssociationRecord], tuple[TermPattern, TermPattern]]

_LITERATURE_SIDES: dict[AssociationKind, tuple[Role, Role]] = {
    AssociationKind.DISEASE_DRUG: (Role.DISEASE, Role.DRUG),
    AssociationKind.DISEASE_SYMPTOM: (Role.DISEASE, Role.SYMPTOM),
    AssociationKind.DISEASE_GENE: (Role.DISEASE, Role.GENE),
    AssociationKind.PROCESS_GENE: (Role.PROCESS, Role.GENE),
}


class PatternResolver:
    """Turns a record's two labels into search patterns.

    With ``synonyms`` on, a label that verifies against its role's ontology
    picks up the names and synonyms of every matched term as alternates. An
    unverified label, or any label when ``synonyms`` is off, searches as
    itself only.
    """

    def __init__(
        self,
        ontologies: Mapping[str, Ontology] | None = None,
        *,
        synonyms: bool = True,
        prefixes: Mapping[Role, str] = DEFAULT_PREFIXES,
    ):
        self.ontologies = dict(ontologies or {})
        self.synonyms = synonyms
        self.prefixes = dict(prefixes)
        self._cache: dict[tuple[Role, str], TermPattern] = {}

    def term_pattern(self, label: str, role: Role) -> TermPattern:
        key = (role, label)
        pattern = self._cache.get(key)
        if pattern is None:
            alternates: set[str] = set()
            onto = self.ontologies.get(self.prefixes.get(role, ""))
            if self.synonyms and onto is not None:
                verdict = verify_term(label, onto)
                for term_id in verdict.matched_ids:
                    alternates |= onto.terms[term_id].normalized_labels()
            pattern = self._cache[key] = TermPattern.from_label(label, alternates)
        return pattern

    def __call__(self, record: AssociationRecord) -> tuple[TermPattern, TermPattern]:
        src_role, tgt_role = _LITERATURE_SIDES[record.kind]
        return (
            self.term_pattern(record.source.label, src_role),
            self.term_pattern(record.target.label, tgt_role),
        )

    def patterns(self, records: Iterable[AssociationRecord]) -> set[TermPattern]:
        out: set[TermPattern] = set()
        for r in records:
            out.update(self(r))
        return out


@dataclass(frozen=True)
class AssociationHit:
    record: AssociationRecord
    count: int
    hit_ratio: float
    matched_doc_ids: tuple[str, ...] = ()

    @property
    def verified(self) -> bool:
        return self.count > 0

    def to_json(self) -> dict:
        return {
            "kind": self.record.kind.value,
            "source": {"id": self.record.source.id, "label": self.record.source.label},
            "target": {"id": self.record.target.id, "label": self.record.target.label},
            "count": self.count,
            "hit_ratio": self.hit_ratio,
            "matched_doc_ids": list(self.matched_doc_ids),
        }


def _hit(record, count, size, sample) -> AssociationHit:
    # ratio over corpus size; an empty corpus gives 0 by convention
    return AssociationHit(record, count, count / size if size else 0.0, tuple(sample))


def verify_associations_naive(
    records: Sequence[AssociationRecord],
    corpus: Corpus,
    resolver: Resolver,
    *,
    sample_cap: int | None = SAMPLE_CAP,
) -> list[AssociationHit]:
    """Count, for each record, the documents containing both of its terms."""
    padded = [_padded(doc.text) for doc in corpus.docs]
    size = len(padded)
    hits = []
    for record in records:
        p_i, p_j = resolver(record)
        counter = 0
        sample: list[str] = []
        for ordinal, text in enumerate(padded):
            if _contains_padded(text, p_i) and _contains_padded(text, p_j):
                counter += 1
                if sample_cap is None or len(sample) < sample_cap:
                    sample.append(corpus.docs[ordinal].doc_id)
        hits.append(_hit(record, counter, size, sample))
    return hits


class IndexMismatchError(KeyError):
    """A record references a pattern string the index was not built for."""


class OccurrenceIndex:
    """Pattern string -> ascending array of document ordinals."""

    def __init__(self, postings: Mapping[str, np.ndarray], doc_ids: Sequence[str]):
        self.postings = dict(postings)
        self.doc_ids = tuple(doc_ids)

    @property
    def corpus_size(self) -> int:
        return len(self.doc_ids)

    def posting(self, pattern_string: str) -> np.ndarray:
        try:
            return self.postings[pattern_string]
        except KeyError:
            raise IndexMismatchError(f"pattern {pattern_string!r} not in index") from None

    def union(self, pattern: TermPattern) -> np.ndarray:
        arrays = [self.posting(s) for s in pattern.strings]
        return reduce(np.union1d, arrays) if len(arrays) > 1 else arrays[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, OccurrenceIndex):
            return NotImplemented
        return (
            self.doc_ids == other.doc_ids
            and self.postings.keys() == other.postings.keys()
            and all(np.array_equal(v, other.postings[k]) for k, v in self.postings.items())
        )

    def __repr__(self) -> str:
        return f"OccurrenceIndex({len(self.postings)} patterns, {self.corpus_size} docs)"


_END = ""  # trie key holding the pattern strings that end at a node; tokens are never empty


def _build_trie(strings: Iterable[str]) -> dict:
    root: dict = {}
    for s in strings:
        toks = _TOKEN_RE.findall(s)
        if not toks:
            continue
        node = root
        for tok in toks:
            node = node.setdefault(tok, {})
        node.setdefault(_END, []).append(s)
    return root


def _scan(trie: dict, texts: Sequence[str], offset: int) -> dict[str, list[int]]:
    found: dict[str, list[int]] = {}
    for i, text in enumerate(texts):
        toks = tokenize(text)
        matched: set[str] = set()
        n = len(toks)
        for start in range(n):
            node = trie.get(toks[start])
            j = start + 1
            while node is not None:
                ends = node.get(_END)
                if ends:
                    matched.update(ends)
                if j == n:
                    break
                node = node.get(toks[j])
                j += 1
        for s in matched:
            found.setdefault(s, []).append(offset + i)
    return found


def _scan_job(args):
    return _scan(*args)


def build_index(
    corpus: Corpus, patterns: Iterable[TermPattern], *, workers: int = 1
) -> OccurrenceIndex:
    """Index every pattern string with a single trie walk per document.

    With ``workers > 1`` documents are split into contiguous chunks scanned
    in separate processes; chunk results are concatenated in order, so the
    postings equal the single-process ones.
    """
    strings = sorted({s for p in patterns for s in p.strings})
    trie = _build_trie(strings)
    texts = [doc.text for doc in corpus.docs]
    if workers > 1 and len(texts) > 1 and trie:
        n_chunks = min(workers, len(texts))
        bounds = np.linspace(0, len(texts), n_chunks + 1).astype(int)
        jobs = [(trie, texts[a:b], int(a)) for a, b in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_scan_job, jobs))
    else:
        parts = [_scan(trie, texts, 0)] if trie else []
    merged: dict[str, list[int]] = {s: [] for s in strings}
    for part in parts:
        for s, ordinals in part.items():
            merged[s].extend(ordinals)
    postings = {s: np.asarray(v, dtype=np.int64) for s, v in merged.items()}
    return OccurrenceIndex(postings, [doc.doc_id for doc in corpus.docs])


def verify_associations_indexed(
    records: Sequence[AssociationRecord],
    index: OccurrenceIndex,
    corpus_size: int,
    resolver: Resolver,
    *,
    sample_cap: int | None = SAMPLE_CAP,
) -> list[AssociationHit]:
    """Same contract as :func:`verify_associations_naive`, answered by
    intersecting the two sides' posting unions."""
    if corpus_size != index.corpus_size:
        raise ValueError(f"corpus size {corpus_size} != indexed size {index.corpus_size}")
    unions: dict[TermPattern, np.ndarray] = {}

    def union(p: TermPattern) -> np.ndarray:
        if p not in unions:
            unions[p] = index.union(p)
        return unions[p]

    hits = []
    for record in records:
        p_i, p_j = resolver(record)
        both = np.intersect1d(union(p_i), union(p_j), assume_unique=True)
        cap = both if sample_cap is None else both[:sample_cap]
        sample = [index.doc_ids[k] for k in cap]
        hits.append(_hit(record, int(both.size), corpus_size, sample))
    return hits


@dataclass(frozen=True)
class CoverageRow:
    """Coverage of one association kind over one period's corpus."""

    kind: AssociationKind
    period: str
    record_count: int
    verified_count: int
    total_frequency: int
    corpus_size: int = 0

    @property
    def verified_pct(self) -> float | None:
        return self.verified_count / self.record_count if self.record_count else None

    @property
    def unverified_pct(self) -> float | None:
        if not self.record_count:
            return None
        return (self.record_count - self.verified_count) / self.record_count

    @property
    def avg_frequency(self) -> float | None:
        return self.total_frequency / self.verified_count if self.verified_count else None


def coverage_stats(
    hits: Sequence[AssociationHit], kind: AssociationKind, period_label: str, corpus_size: int = 0
) -> CoverageRow:
    verified = [h.count for h in hits if h.count > 0]
    return CoverageRow(kind, period_label, len(hits), len(verified), sum(verified), corpus_size)
