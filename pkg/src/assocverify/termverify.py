"""Term verification against ontologies, ID auditing and per-dataset accuracy."""

from __future__ import annotations

import enum
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .assoc import AssociationKind, AssociationRecord, TermRef, dedup
from .ontology import Ontology, lookup_by_id, normalize

__all__ = [
    "AccuracyRow",
    "IdVerdict",
    "MatchKind",
    "MissingOntologyError",
    "Role",
    "TermAccuracyReport",
    "TermVerdict",
    "load_gene_lexicon",
    "validate_id",
    "verify_dataset",
    "verify_term",
]


class MatchKind(enum.Enum):
    NAME_LITERAL = "NameLiteral"
    SYNONYM = "Synonym"
    UNVERIFIED = "Unverified"


class Role(enum.Enum):
    DISEASE = "Disease"
    DRUG = "Drug"
    SYMPTOM = "Symptom"
    PROCESS = "Genetic process"
    GENE = "Genes/proteins"


DEFAULT_PREFIXES: dict[Role, str] = {
    Role.DISEASE: "DOID",
    Role.DRUG: "CHEBI",
    Role.SYMPTOM: "SYMP",
    Role.PROCESS: "GO",
}

_PREFIX_DISPLAY = {"CHEBI": "ChEBI"}


@dataclass(frozen=True)
class IdVerdict:
    syntactically_valid: bool
    exists_in_ontology: bool
    id_name_consistent: bool


@dataclass(frozen=True)
class TermVerdict:
    label: str
    match: MatchKind
    matched_ids: frozenset[str] = frozenset()
    id_checked: IdVerdict | None = None

    @property
    def verified(self) -> bool:
        return self.match is not MatchKind.UNVERIFIED


def verify_term(label: str, ontology: Ontology) -> TermVerdict:
    """Exact match of the normalized label, names first, then synonyms."""
    key = normalize(label)
    ids = ontology.name_index.get(key)
    if ids:
        return TermVerdict(label, MatchKind.NAME_LITERAL, ids)
    ids = ontology.synonym_index.get(key)
    if ids:
        return TermVerdict(label, MatchKind.SYNONYM, ids)
    return TermVerdict(label, MatchKind.UNVERIFIED)


def validate_id(ref: TermRef, ontology: Ontology) -> IdVerdict:
    syntactic = re.fullmatch(re.escape(ontology.prefix) + r":\d+", ref.id) is not None
    term = lookup_by_id(ontology, ref.id) if syntactic else None
    consistent = term is not None and normalize(ref.label) in term.normalized_labels()
    return IdVerdict(syntactic, term is not None, consistent)


class MissingOntologyError(ValueError):
    pass


def load_gene_lexicon(path: str | Path) -> frozenset[str]:
    """One symbol per line; blank lines and ``#`` comments ignored."""
    symbols = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                symbols.add(normalize(line))
    return frozenset(symbols)


@dataclass(frozen=True)
class AccuracyRow:
    category: str
    feature: str
    key: str
    numerator: int
    denominator: int

    @property
    def fraction(self) -> float | None:
        return self.numerator / self.denominator if self.denominator else None


@dataclass
class TermAccuracyReport:
    kind: AssociationKind
    rows: list[AccuracyRow]
    record_count: int = 0
    duplicate_count: int = 0
    verdicts: list[dict[Role, TermVerdict | bool]] = field(default_factory=list, repr=False)

    def get(self, role: Role, key: str) -> AccuracyRow:
        feature_prefix = role.value
        for row in self.rows:
            if row.key == key and row.feature.startswith(feature_prefix):
                return row
        raise KeyError((role, key))


def _sides(kind: AssociationKind) -> list[tuple[Role, str]]:
    return {
        AssociationKind.DISEASE_DRUG: [(Role.DISEASE, "source"), (Role.DRUG, "target")],
        AssociationKind.DISEASE_SYMPTOM: [(Role.DISEASE, "source"), (Role.SYMPTOM, "target")],
        AssociationKind.DISEASE_GENE: [
            (Role.DISEASE, "source"),
            (Role.PROCESS, "go_process"),
            (Role.GENE, "gene_symbol"),
        ],
        AssociationKind.PROCESS_GENE: [(Role.PROCESS, "source"), (Role.GENE, "target")],
    }[kind]


def category_label(kind: AssociationKind, prefixes: Mapping[Role, str] = DEFAULT_PREFIXES) -> str:
    roles = [r for r, _ in _sides(kind)]
    names = []
    for role in roles[:2]:
        if role is Role.GENE:
            names.append("gene")
        else:
            p = prefixes[role]
            names.append(_PREFIX_DISPLAY.get(p, p))
    return "-".join(names) + " associations"


def _ref_for(record: AssociationRecord, attr: str) -> TermRef:
    value = getattr(record, attr)
    if isinstance(value, str):
        return TermRef("", value)
    return value


def verify_dataset(
    records: Iterable[AssociationRecord],
    ontologies: Mapping[str, Ontology],
    gene_lexicon: frozenset[str] | None = None,
    *,
    kind: AssociationKind | None = None,
    prefixes: Mapping[Role, str] = DEFAULT_PREFIXES,
) -> TermAccuracyReport:
    """Verify every term of every (deduplicated) record and tabulate rates.

    ``ontologies`` is keyed by id prefix. All ontologies the kind needs must be
    present, and ``gene_lexicon`` must be given for gene-bearing kinds;
    otherwise :class:`MissingOntologyError` is raised before any scanning.
    """
    records = list(records)
    if kind is None:
        if not records:
            raise ValueError("kind is required for an empty record list")
        kind = records[0].kind
    sides = _sides(kind)
    for role, _ in sides:
        if role is Role.GENE:
            if gene_lexicon is None:
                raise MissingOntologyError(f"{kind.value} verification needs a gene lexicon")
        elif prefixes[role] not in ontologies:
            raise MissingOntologyError(
                f"{kind.value} verification needs the {prefixes[role]} ontology"
            )

    unique, duplicates = dedup(records)
    counts: dict[Role, Counter] = {role: Counter() for role, _ in sides}
    verdicts = []
    for record in unique:
        per_record: dict[Role, TermVerdict | bool] = {}
        for role, attr in sides:
            ref = _ref_for(record, attr)
            c = counts[role]
            c["n"] += 1
            if role is Role.GENE:
                hit = normalize(ref.label) in gene_lexicon
                c["gene"] += hit
                per_record[role] = hit
                continue
            onto = ontologies[prefixes[role]]
            verdict = verify_term(ref.label, onto)
            id_verdict = validate_id(ref, onto)
            verdict = TermVerdict(verdict.label, verdict.match, verdict.matched_ids, id_verdict)
            per_record[role] = verdict
            c["name"] += verdict.match is MatchKind.NAME_LITERAL
            c["syn"] += verdict.match is MatchKind.SYNONYM
            c["syn_any"] += normalize(ref.label) in onto.synonym_index
            c["id_valid"] += id_verdict.syntactically_valid
            c["id_exists"] += id_verdict.exists_in_ontology
            c["id_consistent"] += id_verdict.id_name_consistent
        verdicts.append(per_record)

    category = category_label(kind, prefixes)
    rows: list[AccuracyRow] = []
    for role, _ in sides:
        c = counts[role]
        n = c["n"]
        if role is Role.GENE:
            rows.append(AccuracyRow(category, role.value, "gene_lexicon", c["gene"], n))
            continue
        r = role.value
        rows += [
            AccuracyRow(category, f"{r} name", "name_rate", c["name"], n),
            AccuracyRow(category, f"{r} synonym", "synonym_rate_all", c["syn"], n),
            AccuracyRow(
                category, f"{r} synonym (residual)", "synonym_rate_residual",
                c["syn"], n - c["name"],
            ),
            AccuracyRow(category, f"{r} synonym (any)", "synonym_hit_rate", c["syn_any"], n),
            AccuracyRow(category, f"{r} name/synonym", "combined_rate", c["name"] + c["syn"], n),
            AccuracyRow(category, f"{r} ID well-formed", "id_valid_rate", c["id_valid"], n),
            AccuracyRow(category, f"{r} ID exists", "id_exists_rate", c["id_exists"], n),
            AccuracyRow(
                category, f"{r} ID matches label", "id_consistent_rate", c["id_consistent"], n
            ),
        ]
    return TermAccuracyReport(kind, rows, len(unique), duplicates, verdicts)
