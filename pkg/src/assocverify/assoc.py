"""Association records: the JSON datasets produced by generation and read by
every verifier.

Each dataset file holds one association kind. Elements that do not fit the
kind's schema are kept as :class:`RejectedRecord` rather than aborting the
parse, since malformed model output is itself something we measure.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Any, Callable, Iterable

from .ontology import normalize

__all__ = [
    "AssociationKind",
    "AssociationRecord",
    "DatasetError",
    "DatasetShapeError",
    "DatasetSyntaxError",
    "ParseResult",
    "Provenance",
    "RejectedRecord",
    "TermRef",
    "dedup",
    "derive_process_gene_pairs",
    "load_dataset",
    "parse_associations",
    "serialize_associations",
    "write_dataset",
]


class DatasetError(Exception):
    pass


class DatasetSyntaxError(DatasetError):
    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"invalid JSON at byte offset {byte_offset}: {message}")
        self.byte_offset = byte_offset


class DatasetShapeError(DatasetError):
    """Valid JSON whose top level is neither an array nor a wrapper object."""


class AssociationKind(enum.Enum):
    DISEASE_DRUG = "DiseaseDrug"
    DISEASE_SYMPTOM = "DiseaseSymptom"
    DISEASE_GENE = "DiseaseGene"
    PROCESS_GENE = "ProcessGene"

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def parse(cls, text: str) -> "AssociationKind":
        """Accept the enum value, its name, or the display label."""
        key = re.sub(r"[\s_\-]", "", text).lower()
        for kind in cls:
            if key in (kind.value.lower(), kind.name.replace("_", "").lower()):
                return kind
        raise ValueError(f"unknown association kind {text!r}")


_DISPLAY = {
    AssociationKind.DISEASE_DRUG: "Disease-Drug",
    AssociationKind.DISEASE_SYMPTOM: "Disease-Symptom",
    AssociationKind.DISEASE_GENE: "Disease-Gene",
    AssociationKind.PROCESS_GENE: "Gene process-Gene term",
}

# (id field, label field) for source and target, per kind
_FIELDS: dict[AssociationKind, tuple[tuple[str, str], tuple[str, str]]] = {
    AssociationKind.DISEASE_DRUG: (("disease_id", "disease"), ("drug_id", "drug")),
    AssociationKind.DISEASE_SYMPTOM: (("disease_id", "disease"), ("symptom_id", "symptom")),
    AssociationKind.DISEASE_GENE: (("disease_id", "disease"), ("gene_id", "gene")),
    AssociationKind.PROCESS_GENE: (("go_id", "go_process"), ("gene_id", "gene")),
}
_GO_FIELDS = ("go_id", "go_process")


@dataclass(frozen=True)
class TermRef:
    """A generated term: the id is kept verbatim even when it is bogus."""

    id: str
    label: str

    def __post_init__(self):
        if not self.label.strip():
            raise ValueError("term label is empty")


@dataclass(frozen=True)
class Provenance:
    model_name: str = ""
    generated_at: str | None = None
    batch_id: str = ""


@dataclass(frozen=True)
class AssociationRecord:
    kind: AssociationKind
    source: TermRef
    target: TermRef
    gene_symbol: str | None = None
    go_process: TermRef | None = None
    provenance: Provenance = field(default_factory=Provenance)

    def __post_init__(self):
        if self.kind is not AssociationKind.DISEASE_GENE and (
            self.gene_symbol is not None or self.go_process is not None
        ):
            raise ValueError(f"{self.kind.value} records carry no gene/process fields")

    @property
    def key(self) -> tuple[AssociationKind, str, str]:
        return (self.kind, normalize(self.source.label), normalize(self.target.label))

    def to_json(self) -> dict[str, Any]:
        (sid, slab), (tid, tlab) = _FIELDS[self.kind]
        out: dict[str, Any] = {
            sid: self.source.id,
            slab: self.source.label,
            tid: self.target.id,
            tlab: self.target.label,
        }
        if self.go_process is not None:
            out["go_id"] = self.go_process.id
            out["go_process"] = self.go_process.label
        out["provenance"] = asdict(self.provenance)
        return out


@dataclass(frozen=True)
class RejectedRecord:
    raw: str
    reason: str


@dataclass
class ParseResult:
    records: list[AssociationRecord]
    rejected: list[RejectedRecord]

    @property
    def accepted_count(self) -> int:
        return len(self.records)

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)


_FLAT_KEY = re.compile(r"^[A-Za-z][A-Za-z0-9_]*:\S+$")


def _flat_pair(element: dict, kind: AssociationKind) -> dict | None:
    """Adapter for the ``{"DOID:11734": "Epistaxis", "SYMPTOM:1080": "Nosebleed"}`` form."""
    if kind is AssociationKind.DISEASE_GENE or len(element) != 2:
        return None
    if not all(_FLAT_KEY.match(k) and isinstance(v, str) for k, v in element.items()):
        return None
    source_prefix = "GO" if kind is AssociationKind.PROCESS_GENE else "DOID"
    items = list(element.items())
    items.sort(key=lambda kv: kv[0].split(":", 1)[0].upper() != source_prefix)
    (sid, slab), (tid, tlab) = _FIELDS[kind]
    return {sid: items[0][0], slab: items[0][1], tid: items[1][0], tlab: items[1][1]}


# Extensible: each adapter maps a foreign element shape to the canonical one.
ADAPTERS: list[Callable[[dict, AssociationKind], dict | None]] = [_flat_pair]


def _text_field(element: dict, name: str, required: bool) -> str:
    if name not in element or element[name] is None:
        if required:
            raise ValueError(f"missing field: {name}")
        return ""
    value = element[name]
    if not isinstance(value, str):
        raise ValueError(f"wrong type for field: {name}")
    if required and not value.strip():
        raise ValueError(f"empty field: {name}")
    return value


def _element_to_record(
    element: Any, kind: AssociationKind, default: Provenance
) -> AssociationRecord:
    if not isinstance(element, dict):
        raise ValueError("element is not an object")
    (sid, slab), (tid, tlab) = _FIELDS[kind]
    if slab not in element and tlab not in element:
        for adapt in ADAPTERS:
            adapted = adapt(element, kind)
            if adapted is not None:
                element = adapted
                break
    source = TermRef(_text_field(element, sid, False), _text_field(element, slab, True))
    target = TermRef(_text_field(element, tid, False), _text_field(element, tlab, True))
    gene_symbol = go = None
    if kind is AssociationKind.DISEASE_GENE:
        go = TermRef(
            _text_field(element, _GO_FIELDS[0], False),
            _text_field(element, _GO_FIELDS[1], True),
        )
        gene_symbol = target.label
    provenance = default
    if isinstance(element.get("provenance"), dict):
        p = element["provenance"]
        provenance = Provenance(
            model_name=str(p.get("model_name", default.model_name)),
            generated_at=p.get("generated_at", default.generated_at),
            batch_id=str(p.get("batch_id", default.batch_id)),
        )
    return AssociationRecord(kind, source, target, gene_symbol, go, provenance)


def _top_level_elements(doc: Any, kind: AssociationKind) -> list:
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict):
        arrays = [v for v in doc.values() if isinstance(v, list)]
        if len(arrays) == 1:
            return arrays[0]
        if not arrays and any(adapt(doc, kind) is not None for adapt in ADAPTERS):
            return [doc]
    raise DatasetShapeError(
        "expected a JSON array of records or an object with a single array field"
    )


def parse_associations(
    source: str | IO[str],
    kind: AssociationKind,
    provenance: Provenance | None = None,
) -> ParseResult:
    """Parse a dataset document.

    Element-level faults become :class:`RejectedRecord` entries; only a
    top-level syntax or shape problem raises.
    """
    text = source if isinstance(source, str) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise DatasetSyntaxError(exc.msg, offset) from exc
    default = provenance or Provenance()
    result = ParseResult([], [])
    for element in _top_level_elements(doc, kind):
        try:
            result.records.append(_element_to_record(element, kind, default))
        except ValueError as exc:
            raw = json.dumps(element, ensure_ascii=False, sort_keys=True)
            result.rejected.append(RejectedRecord(raw, str(exc)))
    return result


def serialize_associations(records: Iterable[AssociationRecord]) -> str:
    return json.dumps([r.to_json() for r in records], ensure_ascii=False, indent=1) + "\n"


def dedup(records: list[AssociationRecord]) -> tuple[list[AssociationRecord], int]:
    """Keep the first record per identity key; returns survivors and the number dropped."""
    kinds = {r.kind for r in records}
    if len(kinds) > 1:
        raise ValueError(f"dedup over mixed kinds: {sorted(k.value for k in kinds)}")
    seen: set = set()
    unique = []
    for r in records:
        if r.key not in seen:
            seen.add(r.key)
            unique.append(r)
    return unique, len(records) - len(unique)


def derive_process_gene_pairs(
    records: list[AssociationRecord],
) -> tuple[list[AssociationRecord], int]:
    """Turn each disease-gene record into a (GO process, gene) record.

    Returns the derived records (not deduplicated) and the number of inputs
    skipped for lacking a process or gene symbol.
    """
    out = []
    skipped = 0
    for r in records:
        if r.kind is not AssociationKind.DISEASE_GENE:
            raise ValueError(f"expected DiseaseGene records, got {r.kind.value}")
        if r.go_process is None or not r.gene_symbol or not r.gene_symbol.strip():
            skipped += 1
            continue
        out.append(
            AssociationRecord(
                AssociationKind.PROCESS_GENE,
                source=r.go_process,
                target=TermRef("", r.gene_symbol),
                provenance=r.provenance,
            )
        )
    return out, skipped


def manifest_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".manifest.json")


def write_dataset(
    path: str | Path,
    records: list[AssociationRecord],
    kind: AssociationKind,
    *,
    model_name: str = "",
    batch_id: str = "",
    rejected: int = 0,
    extra: dict | None = None,
) -> Path:
    """Write records plus a sidecar ``<stem>.manifest.json``."""
    path = Path(path)
    body = serialize_associations(records)
    path.write_text(body, encoding="utf-8")
    manifest = {
        "kind": kind.value,
        "model_name": model_name,
        "batch_id": batch_id,
        "record_count": len(records),
        "rejected_count": rejected,
        "sha256": hashlib.sha256(body.encode("utf-8")).hexdigest(),
    }
    if extra:
        manifest.update(extra)
    mpath = manifest_path(path)
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return mpath


def load_dataset(
    path: str | Path, kind: AssociationKind | None = None
) -> tuple[AssociationKind, ParseResult, str]:
    """Read a dataset file; the kind falls back to the sidecar manifest.

    Returns ``(kind, parse_result, sha256_of_file)``.
    """
    path = Path(path)
    data = path.read_bytes()
    if kind is None:
        mpath = manifest_path(path)
        if not mpath.exists():
            raise DatasetError(f"{path}: no kind given and no manifest at {mpath}")
        kind = AssociationKind.parse(json.loads(mpath.read_text(encoding="utf-8"))["kind"])
    result = parse_associations(data.decode("utf-8"), kind)
    return kind, result, hashlib.sha256(data).hexdigest()
