"""Parse and serialize RareDis-style standoff annotation (.txt/.ann pairs).

Entity lines:   T<digits> TAB <TYPE> <start> <end>[;<start> <end>]* TAB <surface text>
Relation lines: R<digits> TAB <TYPE> Arg1:T<digits> Arg2:T<digits>

Offsets are character (code point) based, half-open. Parsing preserves
whatever the annotation file says; defect correction lives in `repair`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import StandoffParseError, ToolkitError

ENTITY_TYPES = (
    "disease",
    "rare_disease",
    "symptom",
    "sign",
    "anaphor",
    "rare_skin_disease",
)

PREDICATES = (
    "produces",
    "increases_risk_of",
    "is_a",
    "is_acron",
    "is_synon",
    "anaphora",
)

# Spellings written back out; the corpus files use these.
ENTITY_TYPE_LABELS = {
    "disease": "DISEASE",
    "rare_disease": "RAREDISEASE",
    "symptom": "SYMPTOM",
    "sign": "SIGN",
    "anaphor": "ANAPHOR",
    "rare_skin_disease": "SKINRAREDISEASE",
}
PREDICATE_LABELS = {
    "produces": "produces",
    "increases_risk_of": "increase_risk_of",
    "is_a": "is_a",
    "is_acron": "is_acron",
    "is_synon": "is_synon",
    "anaphora": "anaphora",
}

_ENTITY_TYPE_ALIASES: dict[str, str] = {}
for _t in ENTITY_TYPES:
    _ENTITY_TYPE_ALIASES[_t] = _t
    _ENTITY_TYPE_ALIASES[_t.replace("_", "")] = _t
# "skin rare disease" and SKINRAREDISEASE name the same type, reordered
_ENTITY_TYPE_ALIASES["skin_rare_disease"] = "rare_skin_disease"
_ENTITY_TYPE_ALIASES["skinraredisease"] = "rare_skin_disease"

_PREDICATE_ALIASES = {p: p for p in PREDICATES}
_PREDICATE_ALIASES["increase_risk_of"] = "increases_risk_of"


def normalize_entity_type(label: str) -> str | None:
    """Map a type label spelling to its canonical name, or None if unknown.

    Case-insensitive; spaces and hyphens count as underscores, and the
    underscore-free spelling is accepted too (e.g. SKINRAREDISEASE).
    """
    key = re.sub(r"[\s\-]+", "_", label.strip().lower())
    hit = _ENTITY_TYPE_ALIASES.get(key)
    if hit is None:
        hit = _ENTITY_TYPE_ALIASES.get(key.replace("_", ""))
    return hit


def normalize_predicate(label: str) -> str | None:
    """Map a relation label spelling to its canonical name, or None."""
    key = re.sub(r"[\s\-]+", "_", label.strip().lower())
    return _PREDICATE_ALIASES.get(key)


@dataclass(frozen=True)
class TextDocument:
    doc_id: str
    text: str

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")

    @property
    def length(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class EntityMention:
    """A typed entity given by one or more character-offset fragments."""

    id: str
    entity_type: str
    fragments: tuple[tuple[int, int], ...]
    surface_text: str

    @property
    def is_discontinuous(self) -> bool:
        return len(self.fragments) > 1

    @property
    def first_start(self) -> int:
        return self.fragments[0][0]

    @property
    def covering_span(self) -> tuple[int, int]:
        """(min fragment start, max fragment end)."""
        return (min(s for s, _ in self.fragments), max(e for _, e in self.fragments))

    def slice_text(self, text: str) -> str:
        """Document slices of the fragments joined by single spaces."""
        return " ".join(text[s:e] for s, e in self.fragments)


@dataclass(frozen=True)
class RelationInstance:
    id: str
    predicate: str
    subject_ref: str
    object_ref: str


@dataclass(frozen=True)
class AnnotatedDocument:
    """A text plus its entity mentions and relation instances.

    unresolved_refs lists (relation id, argument slot, entity id) for every
    relation argument that does not name an entity of this document.
    """

    document: TextDocument
    entities: tuple[EntityMention, ...]
    relations: tuple[RelationInstance, ...]
    unresolved_refs: tuple[tuple[str, str, str], ...] = ()

    @property
    def doc_id(self) -> str:
        return self.document.doc_id

    @property
    def text(self) -> str:
        return self.document.text

    @cached_property
    def entity_map(self) -> dict[str, EntityMention]:
        return {e.id: e for e in self.entities}

    @classmethod
    def build(
        cls,
        document: TextDocument,
        entities: tuple[EntityMention, ...],
        relations: tuple[RelationInstance, ...],
    ) -> "AnnotatedDocument":
        """Construct with unresolved_refs computed and id uniqueness checked."""
        seen: set[str] = set()
        for item in (*entities, *relations):
            if item.id in seen:
                raise ToolkitError(f"duplicate annotation id {item.id}")
            seen.add(item.id)
        return cls(document, entities, relations, compute_unresolved(entities, relations))

    def resolved_relations(self) -> list[tuple[RelationInstance, EntityMention, EntityMention]]:
        """Relations whose two arguments both resolve, with their entities."""
        out = []
        for rel in self.relations:
            subj = self.entity_map.get(rel.subject_ref)
            obj = self.entity_map.get(rel.object_ref)
            if subj is not None and obj is not None:
                out.append((rel, subj, obj))
        return out


def compute_unresolved(
    entities: tuple[EntityMention, ...], relations: tuple[RelationInstance, ...]
) -> tuple[tuple[str, str, str], ...]:
    ids = {e.id for e in entities}
    out = []
    for rel in relations:
        if rel.subject_ref not in ids:
            out.append((rel.id, "Arg1", rel.subject_ref))
        if rel.object_ref not in ids:
            out.append((rel.id, "Arg2", rel.object_ref))
    return tuple(out)


_ENTITY_MID_RE = re.compile(r"^(?P<label>.*\S)\s+(?P<offsets>\d+\s+\d+(?:\s*;\s*\d+\s+\d+)*)$")
_RELATION_MID_RE = re.compile(r"^(?P<label>\S+)\s+Arg1:(?P<arg1>\S+)\s+Arg2:(?P<arg2>\S+)$")
_T_ID_RE = re.compile(r"^T\d+$")
_R_ID_RE = re.compile(r"^R\d+$")


def parse_document(text_content: str, ann_content: str, doc_id: str) -> AnnotatedDocument:
    """Parse a .txt/.ann pair into an AnnotatedDocument.

    Every well-formed line contributes exactly one entity or relation.
    Relation arguments that do not resolve are recorded in unresolved_refs,
    not dropped. Fragment order and span/surface mismatches are preserved
    verbatim; repair is a separate stage.

    Raises StandoffParseError (with the 1-based line number) on malformed
    lines, unknown type labels, offsets outside the text, and duplicate ids.
    """
    document = TextDocument(doc_id, text_content)
    entities: list[EntityMention] = []
    relations: list[RelationInstance] = []
    seen_ids: set[str] = set()

    for line_no, raw in enumerate(ann_content.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        ann_id = fields[0]

        if ann_id.startswith("T"):
            if not _T_ID_RE.match(ann_id):
                raise StandoffParseError(line_no, f"bad entity id {ann_id!r}", doc_id)
            if len(fields) != 3:
                raise StandoffParseError(
                    line_no, f"entity line has {len(fields)} tab-separated fields, expected 3", doc_id
                )
            mid = _ENTITY_MID_RE.match(fields[1])
            if mid is None:
                raise StandoffParseError(line_no, f"cannot parse type/offsets field {fields[1]!r}", doc_id)
            entity_type = normalize_entity_type(mid.group("label"))
            if entity_type is None:
                raise StandoffParseError(
                    line_no, f"unknown entity type {mid.group('label')!r}", doc_id
                )
            fragments = []
            for pair in mid.group("offsets").split(";"):
                start_s, end_s = pair.split()
                start, end = int(start_s), int(end_s)
                if not 0 <= start < end <= document.length:
                    raise StandoffParseError(
                        line_no,
                        f"invalid offsets {start} {end} "
                        f"(need 0 <= start < end <= document length {document.length})",
                        doc_id,
                    )
                fragments.append((start, end))
            if ann_id in seen_ids:
                raise StandoffParseError(line_no, f"duplicate id {ann_id}", doc_id)
            seen_ids.add(ann_id)
            entities.append(EntityMention(ann_id, entity_type, tuple(fragments), fields[2]))

        elif ann_id.startswith("R"):
            if not _R_ID_RE.match(ann_id):
                raise StandoffParseError(line_no, f"bad relation id {ann_id!r}", doc_id)
            if len(fields) != 2:
                raise StandoffParseError(
                    line_no, f"relation line has {len(fields)} tab-separated fields, expected 2", doc_id
                )
            mid = _RELATION_MID_RE.match(fields[1])
            if mid is None:
                raise StandoffParseError(line_no, f"cannot parse relation field {fields[1]!r}", doc_id)
            predicate = normalize_predicate(mid.group("label"))
            if predicate is None:
                raise StandoffParseError(
                    line_no, f"unknown relation type {mid.group('label')!r}", doc_id
                )
            if not _T_ID_RE.match(mid.group("arg1")) or not _T_ID_RE.match(mid.group("arg2")):
                raise StandoffParseError(line_no, "relation arguments must be T<digits> ids", doc_id)
            if ann_id in seen_ids:
                raise StandoffParseError(line_no, f"duplicate id {ann_id}", doc_id)
            seen_ids.add(ann_id)
            relations.append(
                RelationInstance(ann_id, predicate, mid.group("arg1"), mid.group("arg2"))
            )

        else:
            raise StandoffParseError(line_no, f"unsupported line type {ann_id[:1]!r}", doc_id)

    ents = tuple(entities)
    rels = tuple(relations)
    return AnnotatedDocument(document, ents, rels, compute_unresolved(ents, rels))


def serialize_document(doc: AnnotatedDocument) -> tuple[str, str]:
    """Emit (text_content, ann_content) that parse_document inverts exactly."""
    lines = []
    for ent in doc.entities:
        if "\t" in ent.surface_text or "\n" in ent.surface_text:
            # such a line could not survive the round trip
            raise ToolkitError(
                f"{doc.doc_id}: entity {ent.id} surface text contains a tab or newline"
            )
        offsets = ";".join(f"{s} {e}" for s, e in ent.fragments)
        lines.append(f"{ent.id}\t{ENTITY_TYPE_LABELS[ent.entity_type]} {offsets}\t{ent.surface_text}")
    for rel in doc.relations:
        lines.append(
            f"{rel.id}\t{PREDICATE_LABELS[rel.predicate]} Arg1:{rel.subject_ref} Arg2:{rel.object_ref}"
        )
    return doc.text, "".join(line + "\n" for line in lines)


def read_document_pair(txt_path: str | Path, ann_path: str | Path | None = None) -> AnnotatedDocument:
    """Load one <doc_id>.txt / <doc_id>.ann pair (UTF-8)."""
    txt_path = Path(txt_path)
    if ann_path is None:
        ann_path = txt_path.with_suffix(".ann")
    text = txt_path.read_text(encoding="utf-8")
    ann = Path(ann_path).read_text(encoding="utf-8")
    return parse_document(text, ann, txt_path.stem)


def load_corpus_dir(path: str | Path, strict_pairs: bool = True) -> list[AnnotatedDocument]:
    """Load every .txt/.ann pair in a directory, sorted by doc_id.

    An orphan .txt or .ann raises ToolkitError when strict_pairs is set;
    otherwise the orphan is skipped.
    """
    path = Path(path)
    if not path.is_dir():
        raise ToolkitError(f"not a directory: {path}")
    txts = {p.stem: p for p in path.glob("*.txt")}
    anns = {p.stem: p for p in path.glob("*.ann")}
    orphans = sorted(set(txts) ^ set(anns))
    if orphans and strict_pairs:
        raise ToolkitError(f"unpaired .txt/.ann files: {', '.join(orphans)}")
    docs = []
    for doc_id in sorted(set(txts) & set(anns)):
        docs.append(read_document_pair(txts[doc_id], anns[doc_id]))
    return docs


def write_corpus_dir(docs: list[AnnotatedDocument], path: str | Path) -> None:
    """Write documents back as <doc_id>.txt / <doc_id>.ann pairs."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        text, ann = serialize_document(doc)
        (path / f"{doc.doc_id}.txt").write_text(text, encoding="utf-8")
        (path / f"{doc.doc_id}.ann").write_text(ann, encoding="utf-8")
