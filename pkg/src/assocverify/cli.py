"""Command line entry point.

Subcommands: ``generate``, ``verify-terms``, ``verify-assoc``,
``consistency`` and ``fixtures``. Exit status is 0 on success, 1 on an
internal or endpoint failure and 2 on usage or input/config errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from .assoc import (
    AssociationKind,
    DatasetError,
    dedup,
    derive_process_gene_pairs,
    load_dataset,
    write_dataset,
)
from .config import load_config, parse_periods, period_spec, role_prefixes
from .cooccur import (
    PatternResolver,
    build_index,
    coverage_stats,
    verify_associations_indexed,
)
from .corpus import OUT_OF_RANGE, CorpusError, bucket_by_period, load_corpus_file, write_corpus
from .genharness import (
    GenerationError,
    GenerationSession,
    HttpTransport,
    MockTransport,
    PromptSpec,
    TokenBucket,
    consistency_check,
    generate_abstracts,
    generate_associations,
)
from .ontology import OntologyError, load_obo
from .report import (
    ReportFormatError,
    RunManifest,
    emit_consistency,
    emit_coverage,
    emit_term_accuracy,
)
from .synthetic import FixtureSpec, generate_fixture
from .termverify import MissingOntologyError, load_gene_lexicon, verify_dataset

logger = logging.getLogger("assocverify")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _kind(text: str) -> AssociationKind:
    try:
        return AssociationKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _assignment(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key or not value:
        raise argparse.ArgumentTypeError(f"expected NAME=PATH, got {text!r}")
    return key, value


def _require(paths: Sequence[str | Path]) -> None:
    missing = [str(p) for p in paths if not Path(p).exists()]
    if missing:
        raise UsageError(f"missing input: {', '.join(missing)}")


def _workers(args, cfg) -> int:
    n = args.workers if args.workers is not None else cfg["verify"]["workers"]
    return n if n and n > 0 else (os.cpu_count() or 1)


def _load_ontologies(specs, manifest: RunManifest) -> dict:
    onts = {}
    for prefix, path in specs:
        onto = load_obo(path, prefix)
        onts[prefix] = onto
        manifest.add_input(f"ontology:{prefix}", path, onto.checksum)
        manifest.warnings.extend(f"{path}: {w}" for w in onto.warnings)
    return onts


def _write(out: Path, name: str, data: bytes) -> None:
    (out / name).write_bytes(data)


def _finish(out: Path, manifest: RunManifest) -> None:
    for w in manifest.warnings:
        logger.warning(w)
    _write(out, "manifest.json", manifest.to_json())


# -- subcommands -----------------------------------------------------------


def cmd_verify_terms(args, cfg) -> int:
    _require([*args.dataset, *(p for _, p in args.ontology)]
             + ([args.gene_lexicon] if args.gene_lexicon else []))
    prefixes = role_prefixes(cfg)
    manifest = RunManifest(
        "verify-terms", config={"prefixes": {r.name: p for r, p in prefixes.items()}}
    )
    onts = _load_ontologies(args.ontology, manifest)
    lexicon = None
    if args.gene_lexicon:
        lexicon = load_gene_lexicon(args.gene_lexicon)
        manifest.add_input("gene_lexicon", args.gene_lexicon, _sha256(args.gene_lexicon))
    reports = []
    for i, path in enumerate(args.dataset):
        kind, result, sha = load_dataset(path, args.kind)
        manifest.add_input(f"dataset[{i}]", path, sha)
        if result.rejected:
            manifest.warnings.append(f"{path}: {len(result.rejected)} malformed records rejected")
        report = verify_dataset(result.records, onts, lexicon, kind=kind, prefixes=prefixes)
        manifest.stats[f"dataset[{i}]"] = {
            "kind": kind.value,
            "records": len(result.records),
            "rejected": len(result.rejected),
            "duplicates": report.duplicate_count,
        }
        reports.append(report)
    out = _outdir(args.out)
    checksum = manifest.checksum
    _write(out, "term_accuracy.csv", emit_term_accuracy(reports, "csv", checksum))
    _write(out, "term_accuracy.json", emit_term_accuracy(reports, "json", checksum))
    _write(out, "term_accuracy.md", emit_term_accuracy(reports, "markdown", checksum))
    _finish(out, manifest)
    return EXIT_OK


def cmd_verify_assoc(args, cfg) -> int:
    corpora = args.corpus
    if len(corpora) not in (1, len(args.dataset)):
        raise UsageError("give one --corpus for all datasets or one per --dataset")
    _require([*args.dataset, *corpora, *(p for _, p in args.ontology)])
    prefixes = role_prefixes(cfg)
    synonyms = cfg["verify"]["synonyms"] if args.synonyms is None else args.synonyms == "on"
    periods = parse_periods(args.periods) if args.periods else period_spec(cfg)
    workers = _workers(args, cfg)
    sample_cap = None if args.verbose_hits else 20
    manifest = RunManifest(
        "verify-assoc",
        config={
            "synonyms": synonyms,
            "periods": [[p.label, p.start_year, p.end_year] for p in periods.periods],
            "prefixes": {r.name: p for r, p in prefixes.items()},
            "hit_ratio_denominator": "corpus_size",
            "sample_cap": sample_cap,
        },
    )
    onts = _load_ontologies(args.ontology, manifest)
    resolver = PatternResolver(onts, synonyms=synonyms, prefixes=prefixes)
    pairs = list(zip(args.dataset, corpora * len(args.dataset) if len(corpora) == 1 else corpora))

    rows, hit_lines = [], []
    corpus_cache: dict[str, tuple] = {}
    for i, (ds_path, corpus_path) in enumerate(pairs):
        kind, result, sha = load_dataset(ds_path, args.kind)
        manifest.add_input(f"dataset[{i}]", ds_path, sha)
        if corpus_path not in corpus_cache:
            corpus = load_corpus_file(corpus_path)
            corpus_cache[corpus_path] = (corpus, bucket_by_period(corpus, periods))
        corpus, buckets = corpus_cache[corpus_path]
        manifest.add_input(f"corpus[{i}]", corpus_path, corpus.source_checksum)
        if not len(corpus):
            manifest.warnings.append(f"{corpus_path}: corpus is empty; every record unverified")
        unique, dups = dedup(result.records)
        batches = [(kind, unique)]
        if kind is AssociationKind.DISEASE_GENE:
            derived, _ = derive_process_gene_pairs(unique)
            batches.append((AssociationKind.PROCESS_GENE, dedup(derived)[0]))
        manifest.stats[f"dataset[{i}]"] = {
            "kind": kind.value,
            "records": len(result.records),
            "rejected": len(result.rejected),
            "duplicates": dups,
            "corpus_docs": len(corpus),
            "corpus_skipped_malformed": corpus.skipped_malformed,
            "corpus_skipped_duplicate": corpus.skipped_duplicate,
            "out_of_range_docs": len(buckets[OUT_OF_RANGE]),
        }
        patterns = set()
        for _, recs in batches:
            patterns |= resolver.patterns(recs)
        indexes = {
            label: build_index(buckets[label], patterns, workers=workers)
            for label in periods.labels
        }
        for bkind, recs in batches:
            for label in periods.labels:
                size = len(buckets[label])
                hits = verify_associations_indexed(
                    recs, indexes[label], size, resolver, sample_cap=sample_cap
                )
                rows.append(coverage_stats(hits, bkind, label, size))
                hit_lines += [
                    json.dumps({"period": label, **h.to_json()}, ensure_ascii=False)
                    for h in hits
                ]
    out = _outdir(args.out)
    checksum = manifest.checksum
    _write(out, "coverage.csv", emit_coverage(rows, "csv", checksum))
    _write(out, "coverage.json", emit_coverage(rows, "json", checksum))
    _write(out, "coverage.md", emit_coverage(rows, "markdown", checksum))
    header = json.dumps({"manifest_sha256": checksum})
    _write(out, "hits.jsonl", "\n".join([header, *hit_lines]).encode("utf-8") + b"\n")
    _finish(out, manifest)
    return EXIT_OK


def cmd_consistency(args, cfg) -> int:
    _require([*args.dataset, *(p for _, p in args.ontology)])
    prefixes = role_prefixes(cfg)
    synonyms = cfg["verify"]["synonyms"] if args.synonyms is None else args.synonyms == "on"
    workers = _workers(args, cfg)
    manifest = RunManifest(
        "consistency",
        config={"synonyms": synonyms, "prefixes": {r.name: p for r, p in prefixes.items()}},
    )
    onts = _load_ontologies(args.ontology, manifest)
    resolver = PatternResolver(onts, synonyms=synonyms, prefixes=prefixes)
    corpora = {}
    for name, path in args.model:
        if not Path(path).exists():
            manifest.warnings.append(f"model {name}: corpus {path} missing; rows skipped")
            continue
        corpora[name] = load_corpus_file(path)
        manifest.add_input(f"corpus:{name}", path, corpora[name].source_checksum)
    rows = []
    for i, path in enumerate(args.dataset):
        kind, result, sha = load_dataset(path, args.kind)
        manifest.add_input(f"dataset[{i}]", path, sha)
        for name, _ in args.model:
            if name in corpora:
                row = consistency_check(
                    result.records, corpora[name], resolver,
                    model_name=name, kind=kind, workers=workers,
                )
                if row.flagged:
                    manifest.warnings.append(f"model {name}: simulated corpus is empty")
                rows.append(row)
    out = _outdir(args.out)
    checksum = manifest.checksum
    _write(out, "consistency.csv", emit_consistency(rows, "csv", checksum))
    _write(out, "consistency.json", emit_consistency(rows, "json", checksum))
    _write(out, "consistency.md", emit_consistency(rows, "markdown", checksum))
    _finish(out, manifest)
    return EXIT_OK


def cmd_generate(args, cfg) -> int:
    gen = cfg["generate"]
    if args.abstracts_for is None and args.kind is None:
        raise UsageError("generate needs --kind (or --abstracts-for DATASET)")
    endpoint = args.endpoint or os.environ.get("GENAI_ENDPOINT")
    if args.mock:
        _require([args.mock])
        transport = MockTransport.from_file(args.mock)
        endpoint = f"mock:{args.mock}"
        limiter = None
    elif endpoint:
        transport = HttpTransport(endpoint, os.environ.get("GENAI_API_KEY"))
        rpm = args.rpm if args.rpm is not None else gen["requests_per_minute"]
        limiter = TokenBucket(rpm) if rpm else None
    else:
        raise UsageError("no endpoint: pass --endpoint, set GENAI_ENDPOINT, or use --mock")
    model = args.model or gen["model"]
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    session = GenerationSession(
        model, endpoint, batch_id=args.batch_id or f"{model}-{stamp}", params=dict(gen["params"])
    )
    request_kw = dict(
        max_retries=args.max_retries if args.max_retries is not None else gen["max_retries"],
        backoff=args.backoff if args.backoff is not None else gen["backoff_seconds"],
        limiter=limiter,
    )
    out = _outdir(args.out)
    try:
        if args.abstracts_for:
            _require([args.abstracts_for])
            _, result, _ = load_dataset(args.abstracts_for, args.kind)
            diseases = sorted({r.source.label for r in result.records})
            docs = generate_abstracts(
                session, transport, diseases, args.template or gen["abstract_template"],
                per_disease=gen["abstracts_per_disease"], **request_kw,
            )
            write_corpus(out / f"abstracts-{model}.jsonl", docs)
        else:
            spec = PromptSpec(args.kind, args.batch_size or gen["batch_size"])
            records, rejected = generate_associations(
                session, spec, transport, args.target or gen["target"],
                max_in_flight=args.in_flight or gen["max_in_flight"], **request_kw,
            )
            write_dataset(
                out / f"{args.kind.value}.json", records, args.kind,
                model_name=model, batch_id=session.batch_id, rejected=len(rejected),
                extra={"session": session.manifest()},
            )
    finally:
        (out / "session.json").write_text(
            json.dumps(session.manifest(), indent=2) + "\n", encoding="utf-8"
        )
    return EXIT_OK


def cmd_fixtures(args, cfg) -> int:
    spec = FixtureSpec(
        kind=args.kind or AssociationKind.DISEASE_DRUG,
        n_docs=args.docs,
        n_records=args.records,
        seed=args.seed,
        synonym_rate=args.synonym_rate,
        duplicate_lines=args.duplicates,
        periods=parse_periods(args.periods) if args.periods else period_spec(cfg),
    )
    manifest = generate_fixture(_outdir(args.out), spec)
    logger.info("wrote fixture with %d docs, %d records", manifest["n_docs"], manifest["n_records"])
    return EXIT_OK


# -- plumbing --------------------------------------------------------------


def _sha256(path) -> str:
    import hashlib

    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assocverify", description="Verify LLM-generated biomedical associations."
    )
    parser.add_argument("--config", help="TOML config file; flags override it")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ontologies=True):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--kind", type=_kind, help="association kind (else read from manifest)")
        if ontologies:
            p.add_argument(
                "--ontology", type=_assignment, action="append", default=[],
                metavar="PREFIX=PATH", help="OBO ontology with its expected id prefix",
            )

    p = sub.add_parser("verify-terms", help="check term labels and ids against ontologies")
    common(p)
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--gene-lexicon")
    p.set_defaults(func=cmd_verify_terms)

    p = sub.add_parser("verify-assoc", help="co-occurrence coverage per publication period")
    common(p)
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--synonyms", choices=["on", "off"])
    p.add_argument("--periods", help='e.g. "2009-2014,2015-2019,2020-2024"')
    p.add_argument("--workers", type=int)
    p.add_argument("--verbose-hits", action="store_true", help="list every matched doc id")
    p.set_defaults(func=cmd_verify_assoc)

    p = sub.add_parser("consistency", help="co-occurrence against simulated abstracts")
    common(p)
    p.add_argument("--dataset", action="append", required=True)
    p.add_argument("--model", type=_assignment, action="append", required=True,
                   metavar="NAME=CORPUS")
    p.add_argument("--synonyms", choices=["on", "off"])
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("generate", help="generate associations or simulated abstracts")
    common(p, ontologies=False)
    p.add_argument("--target", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--model")
    p.add_argument("--endpoint")
    p.add_argument("--mock", help="JSON file of canned responses keyed by request hash")
    p.add_argument("--batch-id")
    p.add_argument("--max-retries", type=int)
    p.add_argument("--backoff", type=float, help="base backoff in seconds")
    p.add_argument("--rpm", type=float, help="requests per minute")
    p.add_argument("--in-flight", type=int)
    p.add_argument("--abstracts-for", metavar="DATASET",
                   help="generate simulated abstracts for the diseases in DATASET")
    p.add_argument("--template", help="abstract prompt template with {disease}")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fixtures", help="write a synthetic planted corpus and dataset")
    common(p, ontologies=False)
    p.add_argument("--docs", type=int, default=1000)
    p.add_argument("--records", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synonym-rate", type=float, default=0.25)
    p.add_argument("--duplicates", type=int, default=0, help="extra lines repeating doc ids")
    p.add_argument("--periods")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (UsageError, OntologyError, MissingOntologyError, DatasetError, CorpusError,
            ReportFormatError, OSError, ValueError) as exc:
        print(f"assocverify {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenerationError as exc:
        print(f"assocverify {args.command}: endpoint failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
