"""Synthetic corpora and datasets with planted co-occurrences.

The generator keeps its own ledger of which terms it wrote into which
document, so the expected co-occurrence counts in its manifest come from
set bookkeeping and never from text matching.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .assoc import AssociationKind, AssociationRecord, Provenance, TermRef, write_dataset
from .corpus import DEFAULT_PERIODS, OUT_OF_RANGE, AbstractDoc, PeriodSpec

__all__ = ["FixtureSpec", "generate_fixture"]

FILLER = (
    "the of and in to a with for was were is are on by as at from this that these "
    "patients study results methods analysis data clinical cohort group groups "
    "treatment outcome outcomes risk factors association observed significant "
    "increased decreased level levels compared control controls trial randomized "
    "years months follow up baseline mean median ratio confidence interval model "
    "effect effects response responses sample samples population age women men "
    "children adults evidence review reported associated findings suggest further "
    "role potential mechanism mechanisms expression serum blood tissue cell cells "
    "using we our between during after before among within high low rate rates"
).split()

_ONSET = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "qu", "th"]
_VOWEL = ["a", "e", "i", "o", "u", "ae", "ou"]
_TAIL = {
    "source": ["syndrome", "disease", "disorder", ""],
    "target": ["", "", "mab", "ine"],
}

_TARGET_PREFIX = {
    AssociationKind.DISEASE_DRUG: "CHEBI",
    AssociationKind.DISEASE_SYMPTOM: "SYMP",
}


@dataclass(frozen=True)
class FixtureSpec:
    kind: AssociationKind = AssociationKind.DISEASE_DRUG
    n_docs: int = 1000
    n_records: int = 100
    seed: int = 0
    synonym_rate: float = 0.25
    unplanted_fraction: float = 0.4
    max_plants: int = 8
    out_of_range_rate: float = 0.05
    duplicate_lines: int = 0
    periods: PeriodSpec = DEFAULT_PERIODS


class _Words:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used = set(FILLER)

    def fresh(self) -> str:
        while True:
            word = "".join(
                self.rng.choice(_ONSET) + self.rng.choice(_VOWEL)
                for _ in range(self.rng.randint(2, 3))
            )
            if word not in self.used:
                self.used.add(word)
                return word


def _term_label(words: _Words, side: str) -> str:
    tail = words.rng.choice(_TAIL[side])
    head = words.fresh()
    return f"{head} {tail}".strip()


def _obo(path: Path, prefix: str, terms: list[tuple[str, str, str]]) -> None:
    lines = ["format-version: 1.2", f"ontology: synthetic-{prefix.lower()}", ""]
    for tid, name, syn in terms:
        lines += ["[Term]", f"id: {tid}", f"name: {name}", f'synonym: "{syn}" EXACT []', ""]
    path.write_text("\n".join(lines), encoding="utf-8")


def generate_fixture(out_dir: str | Path, spec: FixtureSpec = FixtureSpec()) -> dict:
    """Write ``corpus.jsonl``, ``dataset.json`` (+ manifest), ontologies and
    ``fixture_manifest.json`` under ``out_dir``; returns the manifest dict.

    Supported kinds are DiseaseDrug and DiseaseSymptom. The manifest lists,
    per period, the expected count of every record with synonym matching on
    and off, and the resulting verified fractions.
    """
    if spec.kind not in _TARGET_PREFIX:
        raise ValueError(f"fixtures support {[k.value for k in _TARGET_PREFIX]}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    words = _Words(rng)

    n_src = max(2, spec.n_records // 5)
    n_tgt = max(2, spec.n_records // 2)
    while n_src * n_tgt < spec.n_records:
        n_tgt += 1
    tgt_prefix = _TARGET_PREFIX[spec.kind]
    # (id, name, synonym)
    sources = [(f"DOID:{900000 + i}", _term_label(words, "source"), _term_label(words, "source"))
               for i in range(n_src)]
    targets = [(f"{tgt_prefix}:{700000 + i}", _term_label(words, "target"),
                _term_label(words, "target")) for i in range(n_tgt)]

    pairs: set[tuple[int, int]] = set()
    while len(pairs) < spec.n_records:
        pairs.add((rng.randrange(n_src), rng.randrange(n_tgt)))
    pair_list = sorted(pairs, key=lambda p: rng.random())

    # ledger: per term, docs holding its name / its synonym
    src_docs = [[set(), set()] for _ in sources]
    tgt_docs = [[set(), set()] for _ in targets]
    plants: list[list[str]] = [[] for _ in range(spec.n_docs)]

    def plant(doc: int, term, ledger) -> None:
        via_syn = rng.random() < spec.synonym_rate
        ledger[int(via_syn)].add(doc)
        text = term[2] if via_syn else term[1]
        style = rng.random()
        if style < 0.3:
            text = text.title()
        elif style < 0.4:
            text = f"({text})"
        elif style < 0.5:
            text = text + ","
        plants[doc].append(text)

    for s, t in pair_list:
        k = 0 if rng.random() < spec.unplanted_fraction else rng.randint(1, spec.max_plants)
        for doc in rng.sample(range(spec.n_docs), min(k, spec.n_docs)):
            plant(doc, sources[s], src_docs[s])
            plant(doc, targets[t], tgt_docs[t])
        # decoys: each side alone somewhere
        plant(rng.randrange(spec.n_docs), sources[s], src_docs[s])
        plant(rng.randrange(spec.n_docs), targets[t], tgt_docs[t])

    first, last = spec.periods.periods[0].start_year, spec.periods.periods[-1].end_year
    docs = []
    for i in range(spec.n_docs):
        if rng.random() < spec.out_of_range_rate:
            year = rng.choice([first - 3, first - 1, last + 1])
        else:
            year = rng.randint(first, last)
        body = [rng.choice(FILLER) for _ in range(rng.randint(40, 90))]
        for text in plants[i]:
            body.insert(rng.randrange(len(body) + 1), text)
        title = " ".join(rng.choice(FILLER) for _ in range(6)).capitalize()
        docs.append(AbstractDoc(f"PMID{10_000_000 + i}", title, " ".join(body) + ".", year))

    with open(out / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for i, doc in enumerate(docs):
            fh.write(json.dumps(doc.to_json()) + "\n")
            if i < spec.duplicate_lines:
                fh.write(json.dumps({**doc.to_json(), "body": "duplicate"}) + "\n")

    prov = Provenance("synthetic", None, f"seed-{spec.seed}")
    records = []
    for s, t in pair_list:
        src, tgt = sources[s], targets[t]
        records.append(
            AssociationRecord(
                spec.kind,
                TermRef(src[0], src[1].capitalize()),
                TermRef(tgt[0], tgt[1].capitalize()),
                provenance=prov,
            )
        )
    write_dataset(out / "dataset.json", records, spec.kind, model_name="synthetic",
                  batch_id=f"seed-{spec.seed}")
    _obo(out / "doid.obo", "DOID", sources)
    _obo(out / f"{tgt_prefix.lower()}.obo", tgt_prefix, targets)

    period_docs: dict[str, set[int]] = {label: set() for label in spec.periods.labels}
    period_docs[OUT_OF_RANGE] = set()
    for i, doc in enumerate(docs):
        period_docs[spec.periods.period_of(doc.year)].add(i)

    periods = {}
    for label in spec.periods.labels:
        pdocs = period_docs[label]
        on, off = [], []
        for s, t in pair_list:
            s_on = src_docs[s][0] | src_docs[s][1]
            t_on = tgt_docs[t][0] | tgt_docs[t][1]
            on.append(len(s_on & t_on & pdocs))
            off.append(len(src_docs[s][0] & tgt_docs[t][0] & pdocs))
        periods[label] = {
            "corpus_size": len(pdocs),
            "counts_synonyms_on": on,
            "counts_synonyms_off": off,
            "verified_fraction_on": sum(c > 0 for c in on) / len(on) if on else None,
            "verified_fraction_off": sum(c > 0 for c in off) / len(off) if off else None,
        }
    manifest = {
        "kind": spec.kind.value,
        "seed": spec.seed,
        "n_docs": spec.n_docs,
        "n_records": spec.n_records,
        "duplicate_lines": spec.duplicate_lines,
        "target_prefix": tgt_prefix,
        "out_of_range_docs": len(period_docs[OUT_OF_RANGE]),
        "periods": periods,
    }
    (out / "fixture_manifest.json").write_text(json.dumps(manifest, indent=1) + "\n",
                                               encoding="utf-8")
    return manifest
