"""Entity shape classification, corpus statistics, and train/dev/test splits."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import SplitError
from .standoff import ENTITY_TYPES, PREDICATES, AnnotatedDocument, EntityMention

SHAPE_FLAT = "flat"
SHAPE_DISCONTINUOUS = "discontinuous"
SHAPE_OVERLAPPED = "overlapped"
SHAPE_NESTED = "nested"
SHAPE_CLASSES = (SHAPE_FLAT, SHAPE_DISCONTINUOUS, SHAPE_OVERLAPPED, SHAPE_NESTED)


def _strictly_contains(outer: tuple[int, int], inner: tuple[int, int]) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1] and outer != inner


def _overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return max(a[0], b[0]) < min(a[1], b[1])


def classify_shape(entity: EntityMention, doc: AnnotatedDocument) -> str:
    """Assign exactly one shape class to an entity.

    Precedence: discontinuous (>= 2 fragments) beats nested (covering span
    strictly inside another entity's covering span) beats overlapped (shares
    any character with another covering span, identical spans included)
    beats flat. Comparisons use covering spans, so the result is stable
    under reordering of the other entities.
    """
    if entity.is_discontinuous:
        return SHAPE_DISCONTINUOUS
    span = entity.covering_span
    others = [e.covering_span for e in doc.entities if e.id != entity.id]
    if any(_strictly_contains(other, span) for other in others):
        return SHAPE_NESTED
    if any(_overlaps(other, span) for other in others):
        return SHAPE_OVERLAPPED
    return SHAPE_FLAT


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    entity_counts: dict[str, int]
    relation_counts: dict[str, int]
    shape_counts: dict[str, int]

    @property
    def total_entities(self) -> int:
        return sum(self.entity_counts.values())

    @property
    def total_relations(self) -> int:
        return sum(self.relation_counts.values())

    def to_dict(self) -> dict:
        return {
            "documents": self.documents,
            "entities": dict(self.entity_counts),
            "relations": dict(self.relation_counts),
            "shapes": dict(self.shape_counts),
            "total_entities": self.total_entities,
            "total_relations": self.total_relations,
        }


def corpus_statistics(split: list[AnnotatedDocument]) -> CorpusStats:
    """Exact counts of entities by type, relations by predicate, and shapes."""
    entity_counts = {t: 0 for t in ENTITY_TYPES}
    relation_counts = {p: 0 for p in PREDICATES}
    shape_counts = {s: 0 for s in SHAPE_CLASSES}
    for doc in split:
        for ent in doc.entities:
            entity_counts[ent.entity_type] += 1
            shape_counts[classify_shape(ent, doc)] += 1
        for rel in doc.relations:
            relation_counts[rel.predicate] += 1
    return CorpusStats(len(split), entity_counts, relation_counts, shape_counts)


def format_stats(stats_by_split: dict[str, CorpusStats]) -> str:
    """Human-readable table: one column per split, rows keyed like the counts."""
    splits = list(stats_by_split)
    rows: list[tuple[str, list[int]]] = []
    rows.append(("documents", [stats_by_split[s].documents for s in splits]))
    for t in ENTITY_TYPES:
        rows.append((t, [stats_by_split[s].entity_counts[t] for s in splits]))
    for p in PREDICATES:
        rows.append((p, [stats_by_split[s].relation_counts[p] for s in splits]))
    for c in SHAPE_CLASSES:
        rows.append((c, [stats_by_split[s].shape_counts[c] for s in splits]))
    rows.append(("total entities", [stats_by_split[s].total_entities for s in splits]))
    rows.append(("total relations", [stats_by_split[s].total_relations for s in splits]))

    label_w = max(len(r[0]) for r in rows)
    col_w = max(8, *(len(s) for s in splits))
    lines = [" " * label_w + "  " + "  ".join(f"{s:>{col_w}}" for s in splits)]
    for label, values in rows:
        lines.append(f"{label:<{label_w}}  " + "  ".join(f"{v:>{col_w}}" for v in values))
    return "\n".join(lines) + "\n"


def write_stats_json(stats_by_split: dict[str, CorpusStats], path: str | Path) -> None:
    payload = {name: stats.to_dict() for name, stats in stats_by_split.items()}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SplitSpec:
    """Either ratio mode (shuffle by seed, cut at boundaries) or explicit lists."""

    mode: str  # "ratio" | "file_list"
    ratios: tuple[float, float, float] | None = None
    lists: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode == "ratio":
            if self.ratios is None:
                raise SplitError("ratio mode requires ratios")
            if any(r < 0 for r in self.ratios):
                raise SplitError("ratios must be non-negative")
            if abs(sum(self.ratios) - 1.0) > 1e-9:
                raise SplitError(f"ratios must sum to 1, got {sum(self.ratios)}")
        elif self.mode == "file_list":
            if self.lists is None:
                raise SplitError("file_list mode requires three doc_id lists")
            seen: set[str] = set()
            for part in self.lists:
                for doc_id in part:
                    if doc_id in seen:
                        raise SplitError(f"doc_id {doc_id} appears in more than one list")
                    seen.add(doc_id)
        else:
            raise SplitError(f"unknown split mode {self.mode!r}")


def split_corpus(
    corpus: list[AnnotatedDocument], spec: SplitSpec
) -> tuple[list[AnnotatedDocument], list[AnnotatedDocument], list[AnnotatedDocument]]:
    """Partition a corpus into (train, dev, test); every document lands once."""
    if not corpus:
        raise SplitError("corpus is empty")
    by_id = {doc.doc_id: doc for doc in corpus}

    if spec.mode == "ratio":
        ids = sorted(by_id)
        random.Random(spec.seed).shuffle(ids)
        n = len(ids)
        r1, r2, _ = spec.ratios
        cut1 = int(n * r1 + 1e-9)
        cut2 = int(n * (r1 + r2) + 1e-9)
        parts = (ids[:cut1], ids[cut1:cut2], ids[cut2:])
    else:
        for part in spec.lists:
            for doc_id in part:
                if doc_id not in by_id:
                    raise SplitError(f"split list references unknown doc_id {doc_id}")
        covered = {doc_id for part in spec.lists for doc_id in part}
        missing = sorted(set(by_id) - covered)
        if missing:
            raise SplitError(f"documents not covered by any list: {', '.join(missing)}")
        parts = spec.lists

    return tuple([by_id[i] for i in part] for part in parts)


def read_manifest(path: str | Path) -> tuple[str, ...]:
    """Newline-separated doc_id file; blank lines ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


def write_manifest(docs: list[AnnotatedDocument], path: str | Path) -> None:
    ids = sorted(doc.doc_id for doc in docs)
    Path(path).write_text("".join(i + "\n" for i in ids), encoding="utf-8")
