"""Random corpora, records and an independent regex matcher used as oracle."""

import random
import re

from assocverify.assoc import AssociationKind, AssociationRecord, TermRef
from assocverify.corpus import AbstractDoc, Corpus
from assocverify.ontology import normalize

VOCAB = ["aspirin", "fever", "cough", "lung", "cancer", "heart", "attack", "type", "2",
         "diabetes", "mellitus", "hiv", "aids", "b12", "x", "il", "6", "the", "of", "and"]
SEPARATORS = [" ", "  ", "-", ", ", "/", " (", ") ", ". ", "\n", "_", "'"]


def _phrase_regex(s: str) -> re.Pattern:
    toks = re.findall(r"[^\W_]+", s)
    body = r"[\W_]+".join(re.escape(t) for t in toks)
    return re.compile(r"(?<![^\W_])" + body + r"(?![^\W_])")


def oracle_contains(text: str, strings) -> bool:
    norm = normalize(text)
    return any(re.findall(r"[^\W_]+", s) and _phrase_regex(normalize(s)).search(norm)
               for s in strings)


def oracle_count(docs, left, right) -> int:
    return sum(oracle_contains(d.text, left) and oracle_contains(d.text, right) for d in docs)


def random_phrase(rng: random.Random, max_len: int = 3) -> str:
    words = [rng.choice(VOCAB) for _ in range(rng.randint(1, max_len))]
    if rng.random() < 0.3:
        words = [w.upper() if rng.random() < 0.5 else w.title() for w in words]
    return " ".join(words)


def random_text(rng: random.Random, n_words: int) -> str:
    out = []
    for _ in range(n_words):
        out.append(rng.choice(VOCAB))
        out.append(rng.choice(SEPARATORS))
    text = "".join(out)
    return text.upper() if rng.random() < 0.1 else text


def random_trial(rng: random.Random, max_docs: int = 500, max_records: int = 100):
    docs = tuple(
        AbstractDoc(f"d{i}", random_text(rng, rng.randint(0, 4)),
                    random_text(rng, rng.randint(0, 30)), 2015)
        for i in range(rng.randint(0, max_docs))
    )
    records = [
        AssociationRecord(AssociationKind.DISEASE_DRUG,
                          TermRef("", random_phrase(rng)), TermRef("", random_phrase(rng)))
        for _ in range(rng.randint(1, max_records))
    ]
    return Corpus(docs), records
