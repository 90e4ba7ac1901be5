# %% [markdown]
# # Generating associations without a network
#
# The harness talks to any chat-completion endpoint through a transport. For
# tests and demos a scripted transport replays canned replies, including
# failures and junk.

# %%
import json
import logging

from assocverify.assoc import AssociationKind
from assocverify.genharness import (
    GenerationSession,
    PromptSpec,
    ScriptedTransport,
    build_prompt,
    generate_associations,
)

logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
spec = PromptSpec(AssociationKind.DISEASE_SYMPTOM, batch_size=5)
print(build_prompt(spec))

# %%
def reply(records):
    return json.dumps({"choices": [{"message": {"content": records}}]})

good = reply(json.dumps([{"disease": f"disease {i}", "symptom": f"symptom {i}"} for i in range(5)]))
fenced = reply("```json\n" + json.dumps([{"disease": "gout", "symptom": "joint pain"}] * 5) + "\n```")
transport = ScriptedTransport([503, good, reply("Sorry, here it is: [{"), fenced])

session = GenerationSession("demo-model", batch_id="demo")
records, rejected = generate_associations(session, spec, transport, 10, backoff=0)
len(records), len(rejected)

# %% [markdown]
# Every request, retry and parsed element is accounted for.

# %%
print(json.dumps(session.manifest(), indent=1))
assert session.records_accepted + session.records_rejected == session.elements_parsed
