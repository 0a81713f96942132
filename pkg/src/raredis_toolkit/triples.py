"""The normalized relation unit shared by encoding, decoding, and scoring."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .standoff import ENTITY_TYPES, PREDICATES


@dataclass(frozen=True)
class Triple:
    """(subject text, subject type, predicate, object text, object type).

    Gold triples always carry both entity types. Triples decoded from
    generated text may carry None for a type the output template does not
    encode; the scorer's type-agnostic mode exists for those.
    """

    subject_text: str
    subject_type: str | None
    predicate: str
    object_text: str
    object_type: str | None

    def __post_init__(self):
        if not self.subject_text or not self.object_text:
            raise ValueError("triple entity texts must be non-empty")
        if self.predicate not in PREDICATES:
            raise ValueError(f"unknown predicate {self.predicate!r}")
        for t in (self.subject_type, self.object_type):
            if t is not None and t not in ENTITY_TYPES:
                raise ValueError(f"unknown entity type {t!r}")


def normalize_text(text: str) -> str:
    """Scoring normalization: lowercase, collapse whitespace, strip ends."""
    return re.sub(r"\s+", " ", text).strip().lower()


def normalize_triple(triple: Triple, strict_case: bool = False) -> Triple:
    if strict_case:
        return triple
    return replace(
        triple,
        subject_text=normalize_text(triple.subject_text),
        object_text=normalize_text(triple.object_text),
    )


def triple_key(triple: Triple, strict_case: bool = False, type_agnostic: bool = False) -> tuple:
    """Identity under which triples are collapsed and matched."""
    st = triple.subject_text if strict_case else normalize_text(triple.subject_text)
    ot = triple.object_text if strict_case else normalize_text(triple.object_text)
    if type_agnostic:
        return (st, triple.predicate, ot)
    return (st, triple.subject_type, triple.predicate, ot, triple.object_type)
