# %% [markdown]
# # Do other models agree?
#
# Simulated abstracts written by several models serve as a probe: a dataset's
# association is "consistent" with a model if both terms show up together in
# one of that model's abstracts.

# %%
from pathlib import Path

from assocverify.assoc import load_dataset
from assocverify.cooccur import PatternResolver
from assocverify.corpus import Corpus, load_corpus_file
from assocverify.genharness import consistency_check
from assocverify.ontology import load_obo
from assocverify.report import emit_consistency

FIX = Path(__file__).resolve().parent.parent / "fixtures"
onts = {p: load_obo(FIX / f"{p.lower()}.obo", p) for p in ("DOID", "SYMP", "CHEBI")}
resolver = PatternResolver(onts)

rows = []
for name in ("drug_dataset", "symptom_dataset"):
    _, result, _ = load_dataset(FIX / f"{name}.json")
    for model in ("a", "b"):
        sim = load_corpus_file(FIX / "simulated" / f"model_{model}.jsonl")
        rows.append(consistency_check(result.records, sim, resolver, model_name=f"model_{model}"))
print(emit_consistency(rows, "markdown").decode())

# %% [markdown]
# An empty simulated corpus is flagged rather than silently reported as 0%.

# %%
print(consistency_check(result.records, Corpus(()), resolver, model_name="silent"))
