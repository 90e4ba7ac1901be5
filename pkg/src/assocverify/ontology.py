"""OBO flat-file parsing and normalized name/synonym lookup.

Only the tags needed for term verification are interpreted: ``id``,
``name``, ``synonym``, ``alt_id`` and ``is_obsolete``. Everything else in a
stanza is ignored, and stanzas other than ``[Term]`` are skipped.
"""

from __future__ import annotations

import enum
import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

logger = logging.getLogger(__name__)

__all__ = [
    "Ontology",
    "OntologyError",
    "OntologyPrefixError",
    "OntologyTerm",
    "Synonym",
    "SynonymScope",
    "load_obo",
    "lookup_by_id",
    "normalize",
    "parse_obo",
]

TERM_ID_RE = re.compile(r"^[A-Z]+:\d+$")
_SYNONYM_RE = re.compile(r'^"((?:[^"\\]|\\.)*)"\s*([A-Za-z_]+)?')

# Normalization ruleset v1. Changing any of these tables changes every verdict.
_TO_SPACE = str.maketrans({"-": " ", "‐": " ", "‑": " ", "/": " ", ",": " "})
_DROP = str.maketrans({"'": None, "’": None, "ʼ": None, ".": None})


def normalize(text: str) -> str:
    """Canonical matching form of a label.

    >>> normalize("bull's-eye  Rash")
    'bulls eye rash'
    """
    folded = text.casefold().translate(_TO_SPACE).translate(_DROP)
    return " ".join(folded.split())


class OntologyError(Exception):
    """Raised when an ontology file cannot be read at all."""


class OntologyPrefixError(OntologyError):
    """The file's term ids do not carry the prefix the caller expected."""


class SynonymScope(enum.Enum):
    EXACT = "EXACT"
    RELATED = "RELATED"
    BROAD = "BROAD"
    NARROW = "NARROW"
    UNSPECIFIED = "UNSPECIFIED"

    @classmethod
    def from_keyword(cls, keyword: str | None) -> "SynonymScope":
        if not keyword:
            return cls.UNSPECIFIED
        try:
            return cls(keyword.upper())
        except ValueError:
            return cls.UNSPECIFIED


@dataclass(frozen=True)
class Synonym:
    text: str
    scope: SynonymScope = SynonymScope.UNSPECIFIED

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("synonym text is empty")


@dataclass(frozen=True)
class OntologyTerm:
    id: str
    name: str
    synonyms: tuple[Synonym, ...] = ()
    alt_ids: tuple[str, ...] = ()
    obsolete: bool = False

    def __post_init__(self):
        if not TERM_ID_RE.match(self.id):
            raise ValueError(f"malformed term id {self.id!r}")
        if not self.obsolete and not self.name.strip():
            raise ValueError(f"term {self.id} has no name")

    @property
    def prefix(self) -> str:
        return self.id.split(":", 1)[0]

    def normalized_labels(self) -> set[str]:
        """Normalized name plus every normalized synonym."""
        labels = {normalize(s.text) for s in self.synonyms}
        labels.add(normalize(self.name))
        labels.discard("")
        return labels


def _build_index(pairs: Iterable[tuple[str, str]]) -> dict[str, frozenset[str]]:
    acc: dict[str, set[str]] = {}
    for key, term_id in pairs:
        if key:
            acc.setdefault(key, set()).add(term_id)
    return {k: frozenset(v) for k, v in sorted(acc.items())}


@dataclass(frozen=True)
class Ontology:
    """Immutable term table with name and synonym indexes.

    Indexes are derived from ``terms`` and cover non-obsolete terms only;
    a normalized key may map to several ids.
    """

    prefix: str
    terms: Mapping[str, OntologyTerm]
    name_index: Mapping[str, frozenset[str]] = field(compare=False)
    synonym_index: Mapping[str, frozenset[str]] = field(compare=False)
    alt_index: Mapping[str, str] = field(compare=False)
    checksum: str = ""
    warnings: tuple[str, ...] = ()

    @classmethod
    def from_terms(
        cls,
        prefix: str,
        terms: Iterable[OntologyTerm],
        *,
        checksum: str = "",
        warnings: Iterable[str] = (),
    ) -> "Ontology":
        table = {t.id: t for t in terms}
        live = [t for t in table.values() if not t.obsolete]
        name_index = _build_index((normalize(t.name), t.id) for t in live)
        synonym_index = _build_index(
            (normalize(s.text), t.id) for t in live for s in t.synonyms
        )
        alt_index = {a: t.id for t in table.values() for a in t.alt_ids if a not in table}
        return cls(
            prefix=prefix,
            terms=table,
            name_index=name_index,
            synonym_index=synonym_index,
            alt_index=alt_index,
            checksum=checksum,
            warnings=tuple(warnings),
        )

    def __len__(self) -> int:
        return len(self.terms)

    def rebuilt(self) -> "Ontology":
        return Ontology.from_terms(
            self.prefix, self.terms.values(), checksum=self.checksum, warnings=self.warnings
        )


def lookup_by_id(ontology: Ontology, term_id: str) -> OntologyTerm | None:
    """Exact lookup; alternate ids resolve to their owning term. No trimming."""
    term = ontology.terms.get(term_id)
    if term is None:
        owner = ontology.alt_index.get(term_id)
        if owner is not None:
            term = ontology.terms[owner]
    return term


def _strip_comment(value: str) -> str:
    # trailing "! label" comments, as in "is_a: DOID:4 ! disease"
    idx = value.find(" !")
    return (value[:idx] if idx >= 0 else value).strip()


class _Stanza:
    __slots__ = ("line", "id", "name", "synonyms", "alt_ids", "obsolete")

    def __init__(self, line: int):
        self.line = line
        self.id: str | None = None
        self.name = ""
        self.synonyms: list[Synonym] = []
        self.alt_ids: list[str] = []
        self.obsolete = False


def parse_obo(stream: IO[str] | Iterable[str], expected_prefix: str) -> Ontology:
    """Parse OBO 1.2 text into an :class:`Ontology`.

    Stanzas without an ``id`` (or with an id that is not ``PREFIX:digits``)
    are skipped and recorded in ``Ontology.warnings``. Raises
    :class:`OntologyError` if the stream cannot be read and
    :class:`OntologyPrefixError` if terms exist but none carries
    ``expected_prefix``.
    """
    digest = hashlib.sha256()
    warnings: list[str] = []
    terms: list[OntologyTerm] = []
    current: _Stanza | None = None
    in_term = False

    def close(stanza: _Stanza | None) -> None:
        if stanza is None:
            return
        if stanza.id is None:
            warnings.append(f"line {stanza.line}: [Term] stanza without id skipped")
            return
        try:
            terms.append(
                OntologyTerm(
                    id=stanza.id,
                    name=stanza.name,
                    synonyms=tuple(stanza.synonyms),
                    alt_ids=tuple(stanza.alt_ids),
                    obsolete=stanza.obsolete,
                )
            )
        except ValueError as exc:
            warnings.append(f"line {stanza.line}: {exc}; stanza skipped")

    try:
        for lineno, raw in enumerate(stream, start=1):
            digest.update(raw.encode("utf-8"))
            line = raw.strip()
            if not line or line.startswith("!"):
                continue
            if line.startswith("[") and line.endswith("]"):
                if in_term:
                    close(current)
                in_term = line == "[Term]"
                current = _Stanza(lineno) if in_term else None
                continue
            if not in_term or current is None:
                continue
            tag, sep, value = line.partition(":")
            if not sep:
                continue
            tag = tag.strip()
            value = value.strip()
            if tag == "id":
                if current.id is None:
                    current.id = _strip_comment(value)
            elif tag == "name":
                current.name = value
            elif tag == "alt_id":
                current.alt_ids.append(_strip_comment(value))
            elif tag == "is_obsolete":
                current.obsolete = _strip_comment(value).lower() == "true"
            elif tag == "synonym":
                m = _SYNONYM_RE.match(value)
                text = m.group(1).replace('\\"', '"') if m else ""
                if not text.strip():
                    warnings.append(f"line {lineno}: unparsable synonym {value!r}")
                    continue
                current.synonyms.append(Synonym(text, SynonymScope.from_keyword(m.group(2))))
    except (OSError, UnicodeDecodeError) as exc:
        raise OntologyError(f"cannot read ontology stream: {exc}") from exc
    if in_term:
        close(current)

    for w in warnings:
        logger.warning(w)
    if terms and not any(t.prefix == expected_prefix for t in terms):
        found = sorted({t.prefix for t in terms})
        raise OntologyPrefixError(
            f"expected {expected_prefix} ids but ontology holds {', '.join(found)}"
        )
    return Ontology.from_terms(
        expected_prefix, terms, checksum=digest.hexdigest(), warnings=warnings
    )


def load_obo(path: str | Path, expected_prefix: str) -> Ontology:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_obo(fh, expected_prefix)
    except OSError as exc:
        raise OntologyError(f"cannot open {path}: {exc}") from exc
