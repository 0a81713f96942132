import random

import pytest

from raredis_toolkit.errors import RepairError
from raredis_toolkit.repair import (
    RULE_FRAGMENT_ORDER,
    RULE_RELATION_ARGUMENT,
    RULE_SPAN_BOUNDARY,
    fix_fragment_order,
    fix_relation_arguments,
    fix_span_boundaries,
    repair_all,
    summarize_repairs,
)
from raredis_toolkit.standoff import parse_document
from conftest import balanti_doc_pair, storage_doc_pair
from synth import (
    corrupt_fragment_order,
    corrupt_relation_argument,
    corrupt_trailing_char,
    synthetic_corpus,
)


def assert_repaired_invariants(doc):
    for ent in doc.entities:
        for (s1, e1), (s2, e2) in zip(ent.fragments, ent.fragments[1:]):
            assert (s1, e1) <= (s2, e2) and e1 <= s2
        assert ent.slice_text(doc.text) == ent.surface_text


class TestRelationArguments:
    def test_trailing_zero_stripped(self, rickets_doc):
        fixed, log = fix_relation_arguments(rickets_doc)
        assert fixed.relations[1].object_ref == "T9"
        assert fixed.unresolved_refs == ()
        assert log.entries[0].rule == RULE_RELATION_ARGUMENT
        assert (log.entries[0].before, log.entries[0].after) == ("T90", "T9")

    def test_no_dangling_references_is_a_no_op(self, weakness_doc):
        fixed, log = fix_relation_arguments(weakness_doc)
        assert fixed == weakness_doc
        assert len(log) == 0

    def test_multi_digit_strip_hand_built(self):
        # hand-built: T100 dangles, stripping one zero reaches existing T10
        text = "alpha beta gamma delta"
        ann = (
            "T1\tSIGN 0 5\talpha\n"
            "T10\tDISEASE 6 10\tbeta\n"
            "R1\tproduces Arg1:T100 Arg2:T1\n"
        )
        doc = parse_document(text, ann, "d")
        fixed, log = fix_relation_arguments(doc)
        assert fixed.relations[0].subject_ref == "T10"
        assert fixed.unresolved_refs == ()
        assert [(e.before, e.after) for e in log.entries] == [("T100", "T10")]

    def test_unfixable_reference_logged_unresolved(self):
        text = "alpha beta"
        ann = "T1\tSIGN 0 5\talpha\nR1\tproduces Arg1:T1 Arg2:T7\n"
        doc = parse_document(text, ann, "d")
        fixed, log = fix_relation_arguments(doc)
        assert fixed.unresolved_refs == (("R1", "Arg2", "T7"),)
        assert [(e.before, e.after) for e in log.entries] == [("T7", "UNRESOLVED")]

    def test_zero_strip_requires_target_to_exist(self):
        # T20 dangles but T2 does not exist either: leave dangling
        text = "alpha beta"
        ann = "T1\tSIGN 0 5\talpha\nR1\tproduces Arg1:T1 Arg2:T20\n"
        doc = parse_document(text, ann, "d")
        fixed, log = fix_relation_arguments(doc)
        assert fixed.relations[0].object_ref == "T20"
        assert log.entries[0].after == "UNRESOLVED"


class TestSpanBoundaries:
    def test_missing_trailing_character_extends_to_word_boundary(self):
        text, ann = balanti_doc_pair()
        doc = parse_document(text, ann, "balanti")
        start = text.index("infectious disease")
        assert doc.entities[1].fragments == ((start, start + 17),)  # one short
        fixed, log = fix_span_boundaries(doc)
        ent = fixed.entities[1]
        assert ent.fragments == ((start, start + 18),)
        assert ent.surface_text == "infectious disease"
        assert log.entries[0].rule == RULE_SPAN_BOUNDARY

    def test_consistent_span_unchanged(self, weakness_doc):
        fixed, log = fix_span_boundaries(weakness_doc)
        assert fixed == weakness_doc
        assert len(log) == 0

    def test_extra_trailing_character_shrinks_by_one(self):
        # constructed off-by-one: offsets capture the space after the word
        text = "the rash spreads fast"
        doc = parse_document(text, "T1\tSIGN 4 9\trash\n", "d")
        fixed, log = fix_span_boundaries(doc)
        assert fixed.entities[0].fragments == ((4, 8),)
        assert fixed.entities[0].surface_text == "rash"
        assert len(log) == 1

    def test_larger_mismatch_falls_back_to_surface_rewrite(self):
        text = "the rash spreads fast"
        doc = parse_document(text, "T1\tSIGN 4 8\tcompletely different\n", "d")
        fixed, log = fix_span_boundaries(doc)
        assert fixed.entities[0].surface_text == "rash"
        assert fixed.entities[0].fragments == ((4, 8),)
        assert len(log) == 1

    def test_mid_word_end_without_one_char_fix_left_alone(self):
        # two characters missing: not fixable by a one-char nudge, and slice
        # equals surface, so nothing to rewrite
        text = "severe paralysis occurs"
        doc = parse_document(text, "T1\tSIGN 7 14\tparalys\n", "d")
        fixed, log = fix_span_boundaries(doc)
        assert fixed == doc
        assert len(log) == 0


class TestFragmentOrder:
    def test_reversed_fragments_sorted(self):
        text, ann = storage_doc_pair()
        doc = parse_document(text, ann, "storage")
        fixed, log = fix_fragment_order(doc)
        ent = fixed.entities[0]
        assert ent.fragments == tuple(sorted(doc.entities[0].fragments))
        assert ent.surface_text == "accumulation of gangliosides"
        assert log.entries[0].rule == RULE_FRAGMENT_ORDER

    def test_sorted_input_unchanged(self, weakness_doc):
        fixed, log = fix_fragment_order(weakness_doc)
        assert fixed == weakness_doc
        assert len(log) == 0

    def test_three_shuffled_fragments_match_standalone_sort(self):
        text = "a" * 100
        shuffled = [(40, 45), (10, 15), (60, 70)]
        offsets = ";".join(f"{s} {e}" for s, e in shuffled)
        surface = " ".join(text[s:e] for s, e in shuffled)
        doc = parse_document(text, f"T1\tSIGN {offsets}\t{surface}\n", "d")
        fixed, _ = fix_fragment_order(doc)
        assert list(fixed.entities[0].fragments) == sorted(shuffled)

    def test_overlapping_fragments_raise(self):
        doc = parse_document("a" * 50, "T1\tSIGN 10 20;15 25\taaa\n", "d")
        with pytest.raises(RepairError, match="T1"):
            fix_fragment_order(doc)


class TestRepairAll:
    def test_fixture_with_dangling_argument_fully_resolves(self, rickets_doc):
        fixed, _ = repair_all(rickets_doc)
        assert fixed.unresolved_refs == ()
        assert_repaired_invariants(fixed)

    def test_clean_document_is_identity_with_empty_log(self, weakness_doc):
        fixed, log = repair_all(weakness_doc)
        assert fixed == weakness_doc
        assert len(log) == 0

    def test_three_defect_kinds_give_one_log_entry_per_rule(self):
        # composite fixture: reversed fragments + short span + dangling arg
        text = "Tremors and accumulation of fats called gangliosides occur in Saxotide disease."
        acc = text.index("accumulation of"), text.index("accumulation of") + 15
        gang = text.index("gangliosides"), text.index("gangliosides") + 12
        sax = text.index("Saxotide disease"), text.index("Saxotide disease") + 16
        trem = (0, 6)  # "Tremor" missing its final "s"
        ann = (
            f"T1\tSIGN {gang[0]} {gang[1]};{acc[0]} {acc[1]}\tgangliosides accumulation of\n"
            f"T2\tRAREDISEASE {sax[0]} {sax[1]}\tSaxotide disease\n"
            f"T3\tSIGN {trem[0]} {trem[1]}\tTremor\n"
            "R1\tproduces Arg1:T2 Arg2:T10\n"
        )
        doc = parse_document(text, ann, "d")
        fixed, log = repair_all(doc)
        rules = [e.rule for e in log.entries]
        assert rules == [RULE_FRAGMENT_ORDER, RULE_SPAN_BOUNDARY, RULE_RELATION_ARGUMENT]
        assert fixed.entities[2].surface_text == "Tremors"
        assert fixed.relations[0].object_ref == "T1"
        assert_repaired_invariants(fixed)

    def test_idempotent_on_randomly_corrupted_corpus(self):
        rng = random.Random(11)
        for doc in synthetic_corpus(seed=23, size=200):
            doc = corrupt_relation_argument(doc, rng)
            doc = corrupt_trailing_char(doc, rng)
            doc = corrupt_fragment_order(doc, rng)
            once, _ = repair_all(doc)
            twice, log2 = repair_all(once)
            assert twice == once
            assert_repaired_invariants(once)
            # a second pass may only re-report permanently unresolvable refs
            assert all(e.after == "UNRESOLVED" for e in log2.entries)

    def test_never_deletes_entities_or_changes_types(self):
        rng = random.Random(5)
        for doc in synthetic_corpus(seed=29, size=100):
            corrupted = corrupt_fragment_order(corrupt_trailing_char(doc, rng), rng)
            fixed, _ = repair_all(corrupted)
            assert len(fixed.entities) == len(doc.entities)
            assert len(fixed.relations) == len(doc.relations)
            assert [e.entity_type for e in fixed.entities] == [e.entity_type for e in doc.entities]
            assert [r.predicate for r in fixed.relations] == [r.predicate for r in doc.relations]


class TestSummary:
    def test_rates_on_known_corpus(self, rickets_doc, weakness_doc):
        pairs = []
        for doc in (rickets_doc, weakness_doc):
            _, log = repair_all(doc)
            pairs.append((doc, log))
        summary = summarize_repairs(pairs)
        assert summary.total_relations == 4
        assert summary.relations_argument_fixed == 1
        assert summary.relation_argument_rate == 0.25
        assert summary.entities_span_fixed == 0
        assert summary.span_boundary_rate == 0.0
