"""Generation harness: one-shot prompting of a chat-completion endpoint,
response validation, and the cross-model consistency check.

Every network touch goes through a transport object with a single
``send(payload) -> body`` method, so tests and offline runs swap in
:class:`MockTransport` or :class:`ScriptedTransport`.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import threading
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Protocol, Sequence

from .assoc import (
    AssociationKind,
    AssociationRecord,
    DatasetShapeError,
    DatasetSyntaxError,
    Provenance,
    RejectedRecord,
    dedup,
    parse_associations,
)
from .cooccur import PatternResolver, build_index, verify_associations_indexed
from .corpus import AbstractDoc, Corpus

logger = logging.getLogger(__name__)

INVALID_JSON = "Invalid JSON format in response."

PAIR_LABELS = {
    AssociationKind.DISEASE_SYMPTOM: "DOID-SYMPTOM",
    AssociationKind.DISEASE_DRUG: "DOID-CHEBI",
    AssociationKind.DISEASE_GENE: "DOID-GO-GENE",
    AssociationKind.PROCESS_GENE: "GO-GENE",
}

DEFAULT_EXEMPLARS = {
    AssociationKind.DISEASE_SYMPTOM: '{"DOID:11734": "Epistaxis", "SYMPTOM:1080": "Nosebleed"}',
    AssociationKind.DISEASE_DRUG: (
        '{"disease_id": "DOID:2841", "disease": "Asthma", '
        '"drug_id": "CHEBI:8746", "drug": "Salbutamol"}'
    ),
    AssociationKind.DISEASE_GENE: (
        '{"disease_id": "DOID:10763", "disease": "Hypertension", "go_id": "GO:0008217", '
        '"go_process": "Regulation of blood pressure", "gene": "ACE"}'
    ),
    AssociationKind.PROCESS_GENE: (
        '{"go_id": "GO:0008217", "go_process": "Regulation of blood pressure", "gene": "ACE"}'
    ),
}

INSTRUCTION = (
    "You are an assistant that generates {n} {pair} term associations in a structured "
    "JSON format. Ensure the JSON is valid and correctly formatted for parsing. "
    "Provide one example in the following format:"
)


class GenerationError(Exception):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class TransportError(Exception):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


@dataclass(frozen=True)
class PromptSpec:
    kind: AssociationKind
    batch_size: int = 10
    one_shot_example: str = ""
    system_preamble: str = ""

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.one_shot_example:
            object.__setattr__(self, "one_shot_example", DEFAULT_EXEMPLARS[self.kind])
        json.loads(self.one_shot_example)


def build_prompt(spec: PromptSpec) -> str:
    parts = []
    if spec.system_preamble.strip():
        parts.append(spec.system_preamble.strip())
    parts.append(INSTRUCTION.format(n=spec.batch_size, pair=PAIR_LABELS[spec.kind]))
    parts.append(spec.one_shot_example)
    return "\n".join(parts)


# -- transports ------------------------------------------------------------


class Transport(Protocol):
    def send(self, payload: dict) -> str: ...


def chat_payload(model: str, prompt: str, params: dict | None = None) -> dict:
    payload: dict[str, Any] = {"model": model, "messages": [{"role": "user", "content": prompt}]}
    payload.update(params or {})
    return payload


def request_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class HttpTransport:
    """POSTs the payload as JSON; non-2xx statuses and socket errors raise
    :class:`TransportError`."""

    def __init__(self, endpoint: str, api_key: str | None = None, timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def send(self, payload: dict) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(
            self.endpoint, data=json.dumps(payload).encode("utf-8"), headers=headers
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.read().decode("utf-8")
        except urllib.error.HTTPError as exc:
            raise TransportError(f"HTTP {exc.code}", exc.code) from exc
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(str(exc)) from exc


def _outcome(entry: Any) -> str:
    if isinstance(entry, str):
        return entry
    if isinstance(entry, dict):
        status = int(entry.get("status", 200))
        if status >= 400:
            raise TransportError(f"HTTP {status}", status)
        body = entry.get("body", "")
        return body if isinstance(body, str) else json.dumps(body)
    raise TypeError(f"bad mock entry {entry!r}")


class MockTransport:
    """Replays canned responses keyed by :func:`request_hash`.

    The fixture maps a hash (or ``"*"`` as fallback) to one response or a
    list of responses consumed in order; the last one repeats. A response is
    either a body string or ``{"status": int, "body": ...}``.
    """

    def __init__(self, responses: dict[str, Any]):
        self.responses = {k: v if isinstance(v, list) else [v] for k, v in responses.items()}
        self._cursor: dict[str, int] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "MockTransport":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def send(self, payload: dict) -> str:
        key = request_hash(payload)
        if key not in self.responses:
            key = "*"
        if key not in self.responses:
            raise TransportError("no recorded response for request", 404)
        with self._lock:
            seq = self.responses[key]
            i = self._cursor.get(key, 0)
            self._cursor[key] = i + 1
        return _outcome(seq[min(i, len(seq) - 1)])


class ScriptedTransport:
    """Returns (or raises) the scripted outcomes in order; the last repeats.

    Outcomes are body strings, HTTP status ints (which fail), or mock dicts.
    """

    def __init__(self, outcomes: Sequence[Any]):
        self.outcomes = list(outcomes)
        self.payloads: list[dict] = []
        self._lock = threading.Lock()

    def send(self, payload: dict) -> str:
        with self._lock:
            i = len(self.payloads)
            self.payloads.append(payload)
        entry = self.outcomes[min(i, len(self.outcomes) - 1)]
        if isinstance(entry, int):
            raise TransportError(f"HTTP {entry}", entry)
        return _outcome(entry)


def extract_content(body: str) -> str:
    """``choices[0].message.content`` of a chat-completion body, else the body itself."""
    try:
        doc = json.loads(body)
        return doc["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        return body


class TokenBucket:
    """Requests-per-minute limiter."""

    def __init__(self, per_minute: float, *, clock=time.monotonic, sleep=time.sleep):
        self.rate = per_minute / 60.0
        self.capacity = max(1.0, per_minute)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self.stamp = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            self.tokens = min(self.capacity, self.tokens + (now - self.stamp) * self.rate)
            self.stamp = now
            if self.tokens < 1.0:
                wait = (1.0 - self.tokens) / self.rate
                self.sleep(wait)
                self.stamp = self.clock()
                self.tokens = 1.0
            self.tokens -= 1.0


# -- session ---------------------------------------------------------------


@dataclass
class GenerationSession:
    model_name: str
    endpoint: str = ""
    batch_id: str = "batch"
    requests_sent: int = 0
    responses_ok: int = 0
    responses_rejected: int = 0
    records_accepted: int = 0
    records_rejected: int = 0
    elements_parsed: int = 0
    retries: int = 0
    params: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def _bump(self, **deltas: int) -> None:
        with self._lock:
            for name, d in deltas.items():
                setattr(self, name, getattr(self, name) + d)

    def manifest(self) -> dict:
        return {
            "model_name": self.model_name,
            "endpoint": self.endpoint,
            "batch_id": self.batch_id,
            "requests_sent": self.requests_sent,
            "responses_ok": self.responses_ok,
            "responses_rejected": self.responses_rejected,
            "records_accepted": self.records_accepted,
            "records_rejected": self.records_rejected,
            "elements_parsed": self.elements_parsed,
            "retries": self.retries,
            "sampling_params": dict(self.params),
        }


def request_batch(
    session: GenerationSession,
    prompt: str,
    transport: Transport,
    *,
    max_retries: int = 3,
    backoff: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
    limiter: TokenBucket | None = None,
) -> str:
    """Send one prompt, retrying transport failures with exponential backoff.

    Returns the model's message content. After ``max_retries`` retries the
    last failure is raised as :class:`GenerationError`.
    """
    payload = chat_payload(session.model_name, prompt, session.params)
    attempt = 0
    while True:
        if limiter is not None:
            limiter.acquire()
        session._bump(requests_sent=1)
        try:
            return extract_content(transport.send(payload))
        except TransportError as exc:
            if attempt >= max_retries:
                raise GenerationError(
                    f"request failed after {attempt} retries: {exc}", exc.status
                ) from exc
            attempt += 1
            session._bump(retries=1)
            logger.info("transport failure (%s); retry %d/%d", exc, attempt, max_retries)
            sleep(backoff * 2 ** (attempt - 1))


_FENCE_RE = re.compile(r"```[A-Za-z0-9_-]*[ \t]*\n?(.*?)```", re.DOTALL)


def strip_fences(raw: str) -> str:
    m = _FENCE_RE.search(raw)
    return m.group(1).strip() if m else raw.strip()


@dataclass
class ResponseVerdict:
    records: list[AssociationRecord]
    rejected: list[RejectedRecord]
    error: str | None = None

    @property
    def accepted(self) -> bool:
        return self.error is None

    @property
    def elements(self) -> int:
        return len(self.records) + len(self.rejected)


def validate_response(
    raw: str, kind: AssociationKind, provenance: Provenance | None = None
) -> ResponseVerdict:
    """Parse a model reply into records; a reply yielding none is a rejection."""
    try:
        result = parse_associations(strip_fences(raw), kind, provenance)
    except DatasetSyntaxError:
        return ResponseVerdict([], [], INVALID_JSON)
    except DatasetShapeError as exc:
        return ResponseVerdict([], [], f"wrong shape: {exc}")
    if not result.records:
        reasons = sorted({r.reason for r in result.rejected}) or ["no records"]
        return ResponseVerdict([], result.rejected, "; ".join(reasons))
    return ResponseVerdict(result.records, result.rejected)


def _account(session: GenerationSession, verdict: ResponseVerdict) -> None:
    session._bump(
        elements_parsed=verdict.elements,
        records_accepted=len(verdict.records),
        records_rejected=len(verdict.rejected),
        responses_ok=int(verdict.accepted),
        responses_rejected=int(not verdict.accepted),
    )
    if verdict.error == INVALID_JSON:
        logger.warning(INVALID_JSON)
    elif verdict.error:
        logger.warning("response rejected: %s", verdict.error)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def generate_associations(
    session: GenerationSession,
    spec: PromptSpec,
    transport: Transport,
    target: int,
    *,
    max_in_flight: int = 1,
    max_requests: int | None = None,
    clock: Callable[[], str] = _now,
    **request_kw,
) -> tuple[list[AssociationRecord], list[RejectedRecord]]:
    """Request batches until ``target`` records are accepted.

    Duplicates across batches are kept. Stops early (with a warning) once
    ``max_requests`` prompts have been issued, default five per needed batch.
    """
    prompt = build_prompt(spec)
    if max_requests is None:
        max_requests = 5 * math.ceil(target / spec.batch_size)
    records: list[AssociationRecord] = []
    rejected: list[RejectedRecord] = []
    issued = 0

    def one(i: int) -> ResponseVerdict:
        raw = request_batch(session, prompt, transport, **request_kw)
        prov = Provenance(session.model_name, clock(), f"{session.batch_id}-{i:04d}")
        verdict = validate_response(raw, spec.kind, prov)
        _account(session, verdict)
        return verdict

    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        while len(records) < target and issued < max_requests:
            needed = math.ceil((target - len(records)) / spec.batch_size)
            n = min(max_in_flight, needed, max_requests - issued)
            futures = [pool.submit(one, issued + k) for k in range(n)]
            issued += n
            for fut in futures:  # submission order keeps output deterministic
                verdict = fut.result()
                records.extend(verdict.records)
                rejected.extend(verdict.rejected)
    if len(records) < target:
        logger.warning("stopped after %d requests with %d/%d records", issued, len(records), target)
    return records, rejected


def generate_abstracts(
    session: GenerationSession,
    transport: Transport,
    diseases: Iterable[str],
    template: str,
    *,
    per_disease: int = 1,
    year: int | None = None,
    **request_kw,
) -> list[AbstractDoc]:
    """Ask the model for simulated abstracts, one request per disease and repeat."""
    year = year or datetime.now(timezone.utc).year
    docs = []
    for disease in diseases:
        prompt = template.format(disease=disease)
        for _ in range(per_disease):
            body = request_batch(session, prompt, transport, **request_kw).strip()
            session._bump(elements_parsed=1, records_accepted=1, responses_ok=1)
            docs.append(AbstractDoc(f"{session.model_name}-{len(docs):05d}", disease, body, year))
    return docs


# -- consistency -----------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyRow:
    model_name: str
    kind: AssociationKind
    hit_count: int
    denominator: int
    flagged: bool = False

    @property
    def percentage(self) -> float | None:
        return self.hit_count / self.denominator if self.denominator else None


def consistency_check(
    records: Sequence[AssociationRecord],
    simulated: Corpus,
    resolver: PatternResolver,
    *,
    model_name: str,
    kind: AssociationKind | None = None,
    workers: int = 1,
) -> ConsistencyRow:
    """Fraction of (deduplicated) records whose two terms co-occur in at
    least one simulated abstract."""
    unique, _ = dedup(list(records))
    if kind is None:
        if not unique:
            raise ValueError("kind is required for an empty record list")
        kind = unique[0].kind
    if not len(simulated):
        logger.warning("%s: simulated corpus is empty", model_name)
        return ConsistencyRow(model_name, kind, 0, len(unique), flagged=True)
    index = build_index(simulated, resolver.patterns(unique), workers=workers)
    hits = verify_associations_indexed(unique, index, len(simulated), resolver)
    return ConsistencyRow(model_name, kind, sum(h.count > 0 for h in hits), len(unique))
