"""Encode gold relations into model-target strings and decode generations back.

Three target schemas:

  seq2rel       — relation units with @EntityType@ / @PREDICATE@ special
                  tokens, ordered by entity occurrence, closed by @END@;
                  relation-free documents encode as @NOREL@.
  rel_is        — "The relation between X and Y is <noun>." sentences,
                  where <noun> is the noun form of the predicate.
  natural_lang  — one tailored sentence pattern per relation type.

Decoding is regex-based and total: malformed stretches of a generation are
skipped and reported, never fatal.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .standoff import (
    ENTITY_TYPES,
    PREDICATES,
    AnnotatedDocument,
    normalize_entity_type,
    normalize_predicate,
)
from .triples import Triple, triple_key

logger = logging.getLogger(__name__)

SCHEMA_SEQ2REL = "seq2rel"
SCHEMA_REL_IS = "rel_is"
SCHEMA_NATURAL_LANG = "natural_lang"
SCHEMA_KINDS = (SCHEMA_SEQ2REL, SCHEMA_REL_IS, SCHEMA_NATURAL_LANG)

ENTITY_TOKENS = {
    "disease": "@Disease@",
    "rare_disease": "@RareDisease@",
    "symptom": "@Symptom@",
    "sign": "@Sign@",
    "anaphor": "@Anaphor@",
    "rare_skin_disease": "@RareSkinDisease@",
}
PREDICATE_TOKENS = {
    "produces": "@PRODUCES@",
    "increases_risk_of": "@INCREASES_RISK_OF@",
    "is_a": "@IS_A@",
    "is_acron": "@IS_ACRON@",
    "is_synon": "@IS_SYNON@",
    "anaphora": "@ANAPHORA@",
}
NOREL_TOKEN = "@NOREL@"
END_TOKEN = "@END@"

# only the is_a and is_synon nouns are fixed; the rest may be overridden
DEFAULT_NOUN_MAP = {
    "produces": "producer",
    "increases_risk_of": "risk factor",
    "is_a": "hyponym",
    "is_acron": "acronym",
    "is_synon": "synonym",
    "anaphora": "anaphor",
}

# entity-type names as lowercase words, for the natural_lang templates
TYPE_WORDS = {t: t.replace("_", " ") for t in ENTITY_TYPES}

COPY_INSTRUCTION = (
    "From the given abstract, find all the entities and relations among them. "
    "Do not generate any token outside the abstract."
)

_NL_TEMPLATES = {
    "produces": "{s1} is a {t1} that produces {s2}, as a {t2}",
    "anaphora": "The term {s2} is an anaphor that refers back to the entity of the {t1} {s1}",
    "is_synon": "The {t1} {s1} and the {t2} {s2} are synonyms",
    "is_acron": "The acronym {s1} stands for {s2}, a {t2}",
    "increases_risk_of": (
        "The presence of the {t1} {s1} increases the risk of developing the {t2} {s2}"
    ),
    "is_a": "The {t1} {s1} is a type of {s2}, a {t2}",
}


def special_tokens() -> list[str]:
    """All @...@ tokens, for tokenizer setup."""
    return [ENTITY_TOKENS[t] for t in ENTITY_TYPES] + [
        PREDICATE_TOKENS[p] for p in PREDICATES
    ] + [NOREL_TOKEN, END_TOKEN]


def validate_noun_map(noun_map: dict[str, str]) -> dict[str, str]:
    """Check a predicate -> noun map is total and keeps the fixed nouns."""
    missing = [p for p in PREDICATES if not noun_map.get(p)]
    if missing:
        raise ValueError(f"noun map missing predicates: {', '.join(missing)}")
    extra = [p for p in noun_map if p not in PREDICATES]
    if extra:
        raise ValueError(f"noun map has unknown predicates: {', '.join(extra)}")
    if noun_map["is_a"] != "hyponym" or noun_map["is_synon"] != "synonym":
        raise ValueError('noun map must keep is_a="hyponym" and is_synon="synonym"')
    return noun_map


def occurrence_ordered_triples(doc: AnnotatedDocument) -> list[Triple]:
    """Document triples in entity-occurrence order, duplicates collapsed.

    Order: subject first-fragment start, then object first-fragment start,
    then predicate token. Relations with unresolved arguments are skipped
    with a warning. Multi-fragment entity text is the recorded surface text
    (fragments joined by single spaces).
    """
    skipped = sorted({rel_id for rel_id, _, _ in doc.unresolved_refs})
    if skipped:
        logger.warning(
            "%s: skipping relations with unresolved arguments: %s",
            doc.doc_id,
            ", ".join(skipped),
        )
    keyed = []
    for rel, subj, obj in doc.resolved_relations():
        triple = Triple(
            subj.surface_text, subj.entity_type, rel.predicate, obj.surface_text, obj.entity_type
        )
        keyed.append(((subj.first_start, obj.first_start, PREDICATE_TOKENS[rel.predicate]), triple))
    keyed.sort(key=lambda item: item[0])
    out: list[Triple] = []
    seen: set[tuple] = set()
    for _, triple in keyed:
        key = triple_key(triple)
        if key not in seen:
            seen.add(key)
            out.append(triple)
    return out


def encode_target(
    doc: AnnotatedDocument, kind: str, noun_map: dict[str, str] | None = None
) -> str:
    """Render a repaired document's relation set in the given schema."""
    noun_map = validate_noun_map(noun_map or DEFAULT_NOUN_MAP)
    triples = occurrence_ordered_triples(doc)

    if kind == SCHEMA_SEQ2REL:
        if not triples:
            return NOREL_TOKEN
        units = [
            f"{t.subject_text} {ENTITY_TOKENS[t.subject_type]} "
            f"{t.object_text} {ENTITY_TOKENS[t.object_type]} {PREDICATE_TOKENS[t.predicate]}"
            for t in triples
        ]
        return " ".join(units) + f" {END_TOKEN}"

    if kind == SCHEMA_REL_IS:
        return " ".join(
            f"The relation between {t.subject_text} and {t.object_text} "
            f"is {noun_map[t.predicate]}."
            for t in triples
        )

    if kind == SCHEMA_NATURAL_LANG:
        return ". ".join(
            _NL_TEMPLATES[t.predicate].format(
                s1=t.subject_text,
                t1=TYPE_WORDS[t.subject_type],
                s2=t.object_text,
                t2=TYPE_WORDS[t.object_type],
            )
            for t in triples
        )

    raise ValueError(f"unknown schema kind {kind!r}")


def build_prompt(doc_text: str, copy_instruct: bool) -> str:
    """Optionally prefix the copy instruction, a blank line, then the text."""
    if not doc_text:
        raise ValueError("doc_text must be non-empty")
    if copy_instruct:
        return f"{COPY_INSTRUCTION}\n\n{doc_text}"
    return doc_text


def normalize_generation(generation: str) -> str:
    """Undo tokenizer spacing artifacts in a generated string. Idempotent.

    Collapses whitespace runs, trims the ends, deletes single spaces next to
    hyphens and forward slashes and inside round brackets, and rewrites the
    predicted noun "synonyms" to "synonym" in rel_is sentences.
    """
    s = re.sub(r"\s+", " ", generation).strip()
    s = re.sub(r" ?- ?", "-", s)
    s = re.sub(r" ?/ ?", "/", s)
    s = s.replace("( ", "(").replace(" )", ")")
    s = re.sub(r"\bis synonyms\b", "is synonym", s)
    return s


# --- decoding ---------------------------------------------------------------

_AT_TOKEN_RE = re.compile(r"@([A-Za-z_]+)@")
_QUOTE_PAIRS = (('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’"), ("``", "''"))

# longest first so "rare skin disease" is not read as "rare disease"
_TYPE_WORD_ALT = "|".join(
    sorted((TYPE_WORDS[t] for t in ENTITY_TYPES), key=len, reverse=True)
)
_WORD_TO_TYPE = {TYPE_WORDS[t]: t for t in ENTITY_TYPES}

# entity spans may not cross sentence boundaries, so a mangled sentence
# cannot swallow its well-formed neighbors
_SPAN = r"[^.]+?"

_REL_IS_RE = re.compile(
    rf"the relation(?:ship)? between (?P<s1>{_SPAN}) and (?P<s2>{_SPAN}) "
    rf"is (?P<noun>[A-Za-z][A-Za-z ]*?)\s*(?:\.|$)",
    re.IGNORECASE,
)

_NL_PATTERNS = {
    "produces": re.compile(
        rf"(?P<s1>{_SPAN}) is an? (?P<t1>{_TYPE_WORD_ALT}) that produces "
        rf"(?P<s2>{_SPAN}), as an? (?P<t2>{_TYPE_WORD_ALT})\.?",
        re.IGNORECASE,
    ),
    "anaphora": re.compile(
        rf"The term (?P<s2>{_SPAN}) is an anaphor that refers back to the entity "
        rf"of the (?P<t1>{_TYPE_WORD_ALT}) (?P<s1>{_SPAN})(?:\.|$)",
        re.IGNORECASE,
    ),
    "is_synon": re.compile(
        rf"The (?P<t1>{_TYPE_WORD_ALT}) (?P<s1>{_SPAN}) and the "
        rf"(?P<t2>{_TYPE_WORD_ALT}) (?P<s2>{_SPAN}) are synonyms?\.?",
        re.IGNORECASE,
    ),
    "is_acron": re.compile(
        rf"The acronym (?P<s1>{_SPAN}) stands for (?P<s2>{_SPAN}), an? (?P<t2>{_TYPE_WORD_ALT})\.?",
        re.IGNORECASE,
    ),
    "increases_risk_of": re.compile(
        rf"The presence of the (?P<t1>{_TYPE_WORD_ALT}) (?P<s1>{_SPAN}) increases the risk "
        rf"of developing the (?P<t2>{_TYPE_WORD_ALT}) (?:of )?(?P<s2>{_SPAN})(?:\.|$)",
        re.IGNORECASE,
    ),
    "is_a": re.compile(
        rf"The (?P<t1>{_TYPE_WORD_ALT}) (?P<s1>{_SPAN}) is a type of "
        rf"(?P<s2>{_SPAN}), an? (?P<t2>{_TYPE_WORD_ALT})\.?",
        re.IGNORECASE,
    ),
}


def _strip_quotes(text: str) -> str:
    for open_q, close_q in _QUOTE_PAIRS:
        if text.startswith(open_q) and text.endswith(close_q) and len(text) > len(open_q) + len(close_q):
            return text[len(open_q) : -len(close_q)]
    return text


def _decode_seq2rel(generation: str, report: list[tuple[str, str]]) -> list[Triple]:
    triples: list[Triple] = []
    pending: list[tuple[str, str]] = []
    pos = 0
    for match in _AT_TOKEN_RE.finditer(generation):
        before = generation[pos : match.start()].strip()
        pos = match.end()
        raw = match.group(0)
        name = match.group(1)

        if name.upper() == "END":
            if before:
                report.append((before, "text before the end token"))
            break
        if name.upper() == "NOREL":
            if before:
                report.append((before, "text before the no-relation token"))
            continue

        entity_type = normalize_entity_type(name)
        predicate = normalize_predicate(name)
        if entity_type is not None:
            if not before:
                report.append((raw, "entity-type token without preceding entity text"))
                continue
            pending.append((before, entity_type))
            if len(pending) > 2:
                dropped = pending.pop(0)
                report.append((dropped[0], "more than two entities before a relation token"))
        elif predicate is not None:
            if before:
                report.append((before, "stray text before a relation token"))
            if len(pending) == 2:
                (s_text, s_type), (o_text, o_type) = pending
                triples.append(Triple(s_text, s_type, predicate, o_text, o_type))
            else:
                report.append((raw, "relation token without a subject and object"))
            pending = []
        else:
            report.append((raw, "unknown special token"))
    else:
        tail = generation[pos:].strip()
        if tail:
            report.append((tail, "trailing text without a closing token"))
    for text, _ in pending:
        report.append((text, "entity never attached to a relation"))
    return triples


def _decode_by_patterns(generation, candidates, report, build) -> list[Triple]:
    """Accept non-overlapping matches left to right; report uncovered text."""
    candidates.sort(key=lambda item: (item[1].start(), -item[1].end()))
    triples = []
    cursor = 0
    for predicate, match in candidates:
        if match.start() < cursor:
            continue
        gap = generation[cursor : match.start()].strip(" .")
        if gap:
            report.append((gap, "unrecognized text between relation sentences"))
        triple = build(predicate, match)
        if triple is not None:
            triples.append(triple)
        cursor = match.end()
    tail = generation[cursor:].strip(" .")
    if tail:
        report.append((tail, "unrecognized trailing text"))
    return triples


def _decode_rel_is(
    generation: str, noun_map: dict[str, str], report: list[tuple[str, str]]
) -> list[Triple]:
    noun_to_pred = {noun.lower(): pred for pred, noun in noun_map.items()}
    noun_to_pred.setdefault("synonyms", noun_to_pred.get("synonym", "is_synon"))

    def build(_: str, match: re.Match) -> Triple | None:
        noun = match.group("noun").strip().lower()
        predicate = noun_to_pred.get(noun)
        if predicate is None:
            report.append((match.group(0).strip(), f"unknown relation noun {noun!r}"))
            return None
        s1 = match.group("s1").strip()
        s2 = match.group("s2").strip()
        if not s1 or not s2:
            report.append((match.group(0).strip(), "empty entity span"))
            return None
        return Triple(s1, None, predicate, s2, None)

    candidates = [("", m) for m in _REL_IS_RE.finditer(generation)]
    return _decode_by_patterns(generation, candidates, report, build)


def _decode_natural_lang(generation: str, report: list[tuple[str, str]]) -> list[Triple]:
    def build(predicate: str, match: re.Match) -> Triple | None:
        groups = match.groupdict()
        s1 = groups["s1"].strip()
        s2 = _strip_quotes(groups["s2"].strip())
        if not s1 or not s2:
            report.append((match.group(0).strip(), "empty entity span"))
            return None
        t1 = _WORD_TO_TYPE[groups["t1"].lower()] if groups.get("t1") else None
        t2 = _WORD_TO_TYPE[groups["t2"].lower()] if groups.get("t2") else None
        if predicate == "anaphora":
            t2 = "anaphor"  # the template itself asserts the term is an anaphor
        return Triple(s1, t1, predicate, s2, t2)

    candidates = [
        (predicate, match)
        for predicate, pattern in _NL_PATTERNS.items()
        for match in pattern.finditer(generation)
    ]
    return _decode_by_patterns(generation, candidates, report, build)


def decode_target_report(
    generation: str, kind: str, noun_map: dict[str, str] | None = None
) -> tuple[list[Triple], list[tuple[str, str]]]:
    """Decode a generation; also return (segment, reason) for skipped parts."""
    noun_map = validate_noun_map(noun_map or DEFAULT_NOUN_MAP)
    report: list[tuple[str, str]] = []
    if kind == SCHEMA_SEQ2REL:
        triples = _decode_seq2rel(generation, report)
    elif kind == SCHEMA_REL_IS:
        triples = _decode_rel_is(generation, noun_map, report)
    elif kind == SCHEMA_NATURAL_LANG:
        triples = _decode_natural_lang(generation, report)
    else:
        raise ValueError(f"unknown schema kind {kind!r}")
    return triples, report


def decode_target(
    generation: str, kind: str, noun_map: dict[str, str] | None = None
) -> list[Triple]:
    """Every well-formed relation unit in the generation, in order. Total."""
    triples, _ = decode_target_report(generation, kind, noun_map)
    return triples


@dataclass(frozen=True)
class EncodedExample:
    doc_id: str
    source: str
    target: str


def encode_corpus(
    docs: list[AnnotatedDocument],
    kind: str,
    noun_map: dict[str, str] | None = None,
    copy_instruct: bool = False,
) -> list[EncodedExample]:
    return [
        EncodedExample(
            doc.doc_id,
            build_prompt(doc.text, copy_instruct),
            encode_target(doc, kind, noun_map),
        )
        for doc in docs
    ]
