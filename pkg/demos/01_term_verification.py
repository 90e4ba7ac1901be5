# %% [markdown]
# # Checking generated terms against ontologies
#
# A generated association is only as good as its two terms. Here we load the
# small OBO files shipped under `fixtures/`, look up a few labels, audit the
# ids a model attached to them, and tabulate rates for a whole dataset.

# %%
from pathlib import Path

from assocverify.assoc import TermRef, load_dataset
from assocverify.ontology import load_obo
from assocverify.report import emit_term_accuracy
from assocverify.termverify import Role, validate_id, verify_dataset, verify_term

FIX = Path(__file__).resolve().parent.parent / "fixtures"
onts = {p: load_obo(FIX / f"{p.lower()}.obo", p) for p in ("DOID", "SYMP", "CHEBI", "GO")}
doid = onts["DOID"]
len(doid.terms), doid.checksum[:12]

# %% [markdown]
# Name matches win over synonym matches. Matching ignores case, hyphens and
# apostrophes but nothing fancier.

# %%
for label in ["Hypertension", "HTN", "hypertensive disease", "high blood pressure"]:
    v = verify_term(label, doid)
    print(f"{label:24} {v.match.value:12} {sorted(v.matched_ids)}")

# %% [markdown]
# Ids are checked separately. `SYMPTOM:1080` is not even the right prefix for
# SYMP; `DOID:9352` exists but names a different disease.

# %%
for ref, onto in [(TermRef("SYMPTOM:1080", "Nosebleed"), onts["SYMP"]),
                  (TermRef("DOID:9352", "Essential Hypertension"), doid),
                  (TermRef("DOID:5844", "heart attack"), doid)]:
    print(ref.id, ref.label, validate_id(ref, onto))

# %% [markdown]
# Whole dataset. Duplicates are dropped first and counted on the side.

# %%
kind, result, _ = load_dataset(FIX / "symptom_dataset.json")
report = verify_dataset(result.records, onts)
print(report.get(Role.SYMPTOM, "name_rate").fraction,
      report.get(Role.SYMPTOM, "combined_rate").fraction)
print(emit_term_accuracy(report, "markdown").decode())
