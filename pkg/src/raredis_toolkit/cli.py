"""Command-line entry point: repair, stats, split, flatten, encode, decode,
score, and errors over directories of .txt/.ann pairs.

Exit codes: 0 success, 1 fatal error, 2 usage error. Runs are deterministic
given the same flags and seed; input directories are never modified.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import flatten as flatten_mod
from . import repair as repair_mod
from . import schema as schema_mod
from . import scoring as scoring_mod
from . import standoff
from .errors import ToolkitError


def _load_corpus(args) -> list:
    return standoff.load_corpus_dir(args.input_dir, strict_pairs=not args.lenient_pairs)


def _add_io_args(parser, out_required=True):
    parser.add_argument("--in", dest="input_dir", required=True, help="input corpus directory")
    if out_required:
        parser.add_argument("--out", dest="output_dir", required=True, help="output directory")
    parser.add_argument(
        "--lenient-pairs",
        action="store_true",
        help="warn on unpaired .txt/.ann files instead of failing",
    )


def _load_noun_map(path: str | None) -> dict[str, str] | None:
    if path is None:
        return None
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return schema_mod.validate_noun_map(payload)


def cmd_repair(args) -> int:
    docs = _load_corpus(args)
    repaired = []
    logs = []
    for doc in docs:
        fixed, log = repair_mod.repair_all(doc)
        repaired.append(fixed)
        logs.append(log)
    standoff.write_corpus_dir(repaired, args.output_dir)
    if args.log:
        repair_mod.write_repair_log(logs, args.log)
    summary = repair_mod.summarize_repairs(list(zip(docs, logs)))
    print(
        f"repaired {len(docs)} documents: "
        f"{summary.relations_argument_fixed}/{summary.total_relations} relation arguments fixed "
        f"({summary.relation_argument_rate:.4f}), "
        f"{summary.entities_span_fixed}/{summary.total_entities} entity spans adjusted "
        f"({summary.span_boundary_rate:.4f}), "
        f"{summary.entities_fragment_reordered} fragment lists reordered, "
        f"{summary.relations_unresolvable} relations left unresolvable"
    )
    return 0


def cmd_stats(args) -> int:
    docs = _load_corpus(args)
    stats = corpus_mod.corpus_statistics(docs)
    name = Path(args.input_dir).name or "corpus"
    print(corpus_mod.format_stats({name: stats}), end="")
    if args.out_json:
        corpus_mod.write_stats_json({name: stats}, args.out_json)
    return 0


def cmd_split(args) -> int:
    docs = _load_corpus(args)
    if args.train_list or args.dev_list or args.test_list:
        if not (args.train_list and args.dev_list and args.test_list):
            raise ToolkitError("file_list mode needs --train-list, --dev-list, and --test-list")
        spec = corpus_mod.SplitSpec(
            mode="file_list",
            lists=(
                corpus_mod.read_manifest(args.train_list),
                corpus_mod.read_manifest(args.dev_list),
                corpus_mod.read_manifest(args.test_list),
            ),
        )
    elif args.ratios:
        parts = [float(x) for x in args.ratios.split(",")]
        if len(parts) != 3:
            raise ToolkitError("--ratios needs three comma-separated fractions")
        spec = corpus_mod.SplitSpec(mode="ratio", ratios=tuple(parts), seed=args.seed)
    else:
        raise ToolkitError("split needs either --ratios or the three --*-list flags")

    out = Path(args.output_dir)
    for name, split in zip(("train", "dev", "test"), corpus_mod.split_corpus(docs, spec)):
        standoff.write_corpus_dir(split, out / name)
        corpus_mod.write_manifest(split, out / f"{name}.txt")
        print(f"{name}: {len(split)} documents")
    return 0


def cmd_flatten(args) -> int:
    docs = _load_corpus(args)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    flattened = []
    for doc in docs:
        flat, offset_map = flatten_mod.flatten_document(doc)
        flattened.append(flat)
        flatten_mod.write_offset_map(offset_map, out / f"{doc.doc_id}.offsets.json")
    standoff.write_corpus_dir(flattened, out)
    print(f"flattened {len(docs)} documents")
    return 0


def cmd_encode(args) -> int:
    docs = _load_corpus(args)
    noun_map = _load_noun_map(args.noun_map)
    examples = schema_mod.encode_corpus(
        docs, args.schema, noun_map=noun_map, copy_instruct=args.copy_instruct
    )
    out = Path(args.out_file)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as handle:
        for ex in examples:
            handle.write(
                json.dumps(
                    {"doc_id": ex.doc_id, "source": ex.source, "target": ex.target},
                    ensure_ascii=False,
                )
                + "\n"
            )
    if args.schema == schema_mod.SCHEMA_SEQ2REL:
        vocab_path = out.parent / "special_tokens.txt"
        vocab_path.write_text(
            "".join(tok + "\n" for tok in schema_mod.special_tokens()), encoding="utf-8"
        )
        print(f"wrote {len(examples)} examples to {out} and tokens to {vocab_path}")
    else:
        print(f"wrote {len(examples)} examples to {out}")
    return 0


def cmd_decode(args) -> int:
    in_dir = Path(args.input_dir)
    if not in_dir.is_dir():
        raise ToolkitError(f"not a directory: {in_dir}")
    noun_map = _load_noun_map(args.noun_map)
    triples_by_doc = {}
    report_lines = []
    for path in sorted(in_dir.iterdir()):
        if not path.is_file():
            continue
        generation = path.read_text(encoding="utf-8")
        if not args.raw:
            generation = schema_mod.normalize_generation(generation)
        triples, skipped = schema_mod.decode_target_report(generation, args.schema, noun_map)
        triples_by_doc[path.stem] = triples
        report_lines.extend(f"{path.stem}\t{reason}\t{segment}" for segment, reason in skipped)
    scoring_mod.write_triples_file(triples_by_doc, args.out_file)
    if args.report:
        Path(args.report).write_text(
            "".join(line + "\n" for line in report_lines), encoding="utf-8"
        )
    total = sum(len(v) for v in triples_by_doc.values())
    print(
        f"decoded {total} triples from {len(triples_by_doc)} generations "
        f"({len(report_lines)} segments skipped)"
    )
    return 0


def _read_scored_files(args):
    gold = scoring_mod.read_triples_file(args.gold)
    pred = scoring_mod.read_triples_file(args.pred)
    return gold, pred


def cmd_score(args) -> int:
    gold, pred = _read_scored_files(args)
    report = scoring_mod.score_corpus(
        gold, pred, strict_case=args.strict_case, type_agnostic=args.type_agnostic
    )
    print(scoring_mod.format_report(report), end="")
    if args.out_json:
        Path(args.out_json).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_errors(args) -> int:
    gold, pred = _read_scored_files(args)
    texts = {}
    if args.docs:
        for doc in standoff.load_corpus_dir(args.docs, strict_pairs=False):
            texts[doc.doc_id] = doc.text
    records = []
    for doc_id in sorted(set(gold) | set(pred)):
        records.extend(
            scoring_mod.categorize_errors(
                gold.get(doc_id, []),
                pred.get(doc_id, []),
                doc_text=texts.get(doc_id),
                doc_id=doc_id,
                strict_case=args.strict_case,
                type_agnostic=args.type_agnostic,
            )
        )
    scoring_mod.write_error_records(records, args.audit)
    counts: dict[str, int] = {}
    for record in records:
        counts[record.category] = counts.get(record.category, 0) + 1
    for category in sorted(counts):
        print(f"{category}: {counts[category]}")
    print(f"wrote {len(records)} error records to {args.audit}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raredis",
        description="Corpus toolkit for end-to-end relation extraction "
        "on RareDis-style standoff annotations.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("repair", help="apply the annotation defect fixes")
    _add_io_args(p)
    p.add_argument("--log", help="write the repair audit log to this file")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("stats", help="entity/relation/shape statistics")
    _add_io_args(p, out_required=False)
    p.add_argument("--out", dest="out_json", help="also write machine-readable stats (JSON)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="train/dev/test splitting")
    _add_io_args(p)
    p.add_argument("--ratios", help="three comma-separated fractions summing to 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-list", help="manifest of doc_ids for the train split")
    p.add_argument("--dev-list", help="manifest of doc_ids for the dev split")
    p.add_argument("--test-list", help="manifest of doc_ids for the test split")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("flatten", help="render discontinuous entities contiguous")
    _add_io_args(p)
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("encode", help="write model-target records for a schema")
    _add_io_args(p, out_required=False)
    p.add_argument("--out", dest="out_file", required=True, help="output records file (JSONL)")
    p.add_argument(
        "--schema",
        required=True,
        type=lambda s: s.replace("-", "_"),
        choices=["seq2rel", "rel_is", "natural_lang"],
        metavar="{seq2rel|rel-is|natural-lang}",
        help="target schema",
    )
    p.add_argument("--copy-instruct", action="store_true", help="prefix the copy instruction")
    p.add_argument("--noun-map", help="JSON file mapping predicates to nouns (rel-is)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode generation files back into triples")
    p.add_argument("--in", dest="input_dir", required=True, help="directory of generation files")
    p.add_argument("--out", dest="out_file", required=True, help="output triples file (TSV)")
    p.add_argument(
        "--schema",
        required=True,
        type=lambda s: s.replace("-", "_"),
        choices=["seq2rel", "rel_is", "natural_lang"],
        metavar="{seq2rel|rel-is|natural-lang}",
    )
    p.add_argument("--noun-map", help="JSON file mapping predicates to nouns (rel-is)")
    p.add_argument("--raw", action="store_true", help="skip generation normalization")
    p.add_argument("--report", help="write skipped-segment diagnostics to this file")
    p.set_defaults(func=cmd_decode)

    for name in ("score", "errors"):
        p = sub.add_parser(
            name,
            help="strict exact-match scoring" if name == "score" else "categorize FP/FN errors",
        )
        p.add_argument("--gold", required=True, help="gold triples file (TSV)")
        p.add_argument("--pred", required=True, help="predicted triples file (TSV)")
        p.add_argument("--strict-case", action="store_true", help="disable text normalization")
        p.add_argument("--type-agnostic", action="store_true", help="ignore entity types")
        if name == "score":
            p.add_argument("--out", dest="out_json", help="also write the report as JSON")
            p.set_defaults(func=cmd_score)
        else:
            p.add_argument("--audit", required=True, help="error-record audit file (JSONL)")
            p.add_argument("--docs", help="corpus directory for hallucination detection")
            p.set_defaults(func=cmd_errors)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing input file: {exc.filename}", file=sys.stderr)
        return 1
    except (ToolkitError, ValueError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
