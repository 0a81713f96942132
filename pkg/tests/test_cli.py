import json
from pathlib import Path

import pytest

from raredis_toolkit.cli import run_cli
from raredis_toolkit.schema import occurrence_ordered_triples
from raredis_toolkit.scoring import write_triples_file
from raredis_toolkit.standoff import load_corpus_dir
from raredis_toolkit.triples import Triple


def dir_snapshot(path: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


class TestRepairCommand:
    def test_repairs_and_logs(self, mini_corpus_dir, tmp_path, capsys):
        out = tmp_path / "fixed"
        log = tmp_path / "repairs.txt"
        code = run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(out), "--log", str(log)])
        assert code == 0
        fixed = load_corpus_dir(out)
        assert all(not d.unresolved_refs for d in fixed)
        log_text = log.read_text(encoding="utf-8")
        assert "rickets relation_argument R5 T90 -> T9" in log_text
        assert "balanti span_boundary T24" in log_text
        assert "storage fragment_order T1" in log_text
        assert "repaired 5 documents" in capsys.readouterr().out

    def test_input_directory_unmodified(self, mini_corpus_dir, tmp_path):
        before = dir_snapshot(mini_corpus_dir)
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(tmp_path / "o")])
        assert dir_snapshot(mini_corpus_dir) == before

    def test_byte_identical_reruns(self, mini_corpus_dir, tmp_path):
        outs = []
        for name in ("o1", "o2"):
            out = tmp_path / name
            run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(out)])
            outs.append(dir_snapshot(out))
        assert outs[0] == outs[1]


class TestStatsCommand:
    def test_table_and_json(self, mini_corpus_dir, tmp_path, capsys):
        json_path = tmp_path / "stats.json"
        code = run_cli(["stats", "--in", str(mini_corpus_dir), "--out", str(json_path)])
        assert code == 0
        table = capsys.readouterr().out
        assert "rare_disease" in table and "produces" in table
        payload = json.loads(json_path.read_text(encoding="utf-8"))
        stats = payload[mini_corpus_dir.name]
        assert stats["documents"] == 5
        assert stats["entities"]["sign"] == 4
        assert stats["relations"]["produces"] == 4


class TestSplitCommand:
    def test_ratio_mode_writes_manifests_and_dirs(self, mini_corpus_dir, tmp_path):
        out = tmp_path / "splits"
        code = run_cli([
            "split", "--in", str(mini_corpus_dir), "--out", str(out),
            "--ratios", "0.6,0.2,0.2", "--seed", "7",
        ])
        assert code == 0
        ids = []
        for name, expected in (("train", 3), ("dev", 1), ("test", 1)):
            manifest = (out / f"{name}.txt").read_text(encoding="utf-8").split()
            assert len(manifest) == expected
            assert len(load_corpus_dir(out / name)) == expected
            ids.extend(manifest)
        assert sorted(ids) == ["balanti", "empty", "rickets", "storage", "weakness"]

    def test_file_list_mode(self, mini_corpus_dir, tmp_path):
        lists = tmp_path / "lists"
        lists.mkdir()
        (lists / "train.txt").write_text("rickets\nweakness\nstorage\n", encoding="utf-8")
        (lists / "dev.txt").write_text("balanti\n", encoding="utf-8")
        (lists / "test.txt").write_text("empty\n", encoding="utf-8")
        out = tmp_path / "splits"
        code = run_cli([
            "split", "--in", str(mini_corpus_dir), "--out", str(out),
            "--train-list", str(lists / "train.txt"),
            "--dev-list", str(lists / "dev.txt"),
            "--test-list", str(lists / "test.txt"),
        ])
        assert code == 0
        assert (out / "dev.txt").read_text(encoding="utf-8") == "balanti\n"


class TestFlattenCommand:
    def test_writes_pairs_and_sidecars(self, mini_corpus_dir, tmp_path):
        fixed = tmp_path / "fixed"
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(fixed)])
        flat = tmp_path / "flat"
        code = run_cli(["flatten", "--in", str(fixed), "--out", str(flat)])
        assert code == 0
        docs = load_corpus_dir(flat)
        assert all(len(e.fragments) == 1 for d in docs for e in d.entities)
        assert (flat / "weakness.offsets.json").exists()
        weakness = next(d for d in docs if d.doc_id == "weakness")
        assert "arms and weakness in the muscles of the legs" in weakness.text


class TestEncodeDecodeScore:
    @pytest.mark.parametrize(
        "schema_flag,kind,score_flags",
        [
            ("seq2rel", "seq2rel", []),
            ("rel-is", "rel_is", ["--type-agnostic"]),
            ("natural-lang", "natural_lang", ["--type-agnostic"]),
        ],
    )
    def test_decode_of_gold_encodings_scores_perfectly(
        self, mini_corpus_dir, tmp_path, capsys, schema_flag, kind, score_flags
    ):
        fixed = tmp_path / "fixed"
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(fixed)])

        records = tmp_path / f"{kind}.jsonl"
        code = run_cli([
            "encode", "--in", str(fixed), "--out", str(records), "--schema", schema_flag,
        ])
        assert code == 0

        # feed the gold targets back through decode as if they were generations
        generations = tmp_path / f"gen_{kind}"
        generations.mkdir()
        n_rel_docs = 0
        for line in records.read_text(encoding="utf-8").splitlines():
            row = json.loads(line)
            (generations / f"{row['doc_id']}.txt").write_text(row["target"], encoding="utf-8")
            n_rel_docs += 1
        assert n_rel_docs == 5

        decoded = tmp_path / f"pred_{kind}.tsv"
        code = run_cli([
            "decode", "--in", str(generations), "--out", str(decoded), "--schema", schema_flag,
        ])
        assert code == 0

        gold = {
            doc.doc_id: occurrence_ordered_triples(doc) for doc in load_corpus_dir(fixed)
        }
        gold_path = tmp_path / f"gold_{kind}.tsv"
        write_triples_file(gold, gold_path)

        capsys.readouterr()  # drain output from the earlier subcommands
        code = run_cli(
            ["score", "--gold", str(gold_path), "--pred", str(decoded), *score_flags]
        )
        assert code == 0
        out = capsys.readouterr().out
        micro = out.strip().splitlines()[1].split()
        assert micro[0] == "micro"
        assert micro[1:4] == ["1.0000", "1.0000", "1.0000"]

    def test_seq2rel_encode_emits_token_vocabulary(self, mini_corpus_dir, tmp_path):
        fixed = tmp_path / "fixed"
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(fixed)])
        records = tmp_path / "enc" / "train.jsonl"
        run_cli(["encode", "--in", str(fixed), "--out", str(records), "--schema", "seq2rel"])
        vocab = (records.parent / "special_tokens.txt").read_text(encoding="utf-8").split()
        assert len(vocab) == 14
        assert "@NOREL@" in vocab

    def test_copy_instruct_flag_prefixes_sources(self, mini_corpus_dir, tmp_path):
        fixed = tmp_path / "fixed"
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(fixed)])
        records = tmp_path / "train.jsonl"
        run_cli([
            "encode", "--in", str(fixed), "--out", str(records),
            "--schema", "rel-is", "--copy-instruct",
        ])
        for line in records.read_text(encoding="utf-8").splitlines():
            assert json.loads(line)["source"].startswith("From the given abstract")

    def test_decode_report_lists_skipped_segments(self, tmp_path):
        generations = tmp_path / "gen"
        generations.mkdir()
        (generations / "doc1.txt").write_text(
            "junk @PRODUCES@ a @Sign@ b @Disease@ @IS_A@ @END@", encoding="utf-8"
        )
        report = tmp_path / "skips.txt"
        code = run_cli([
            "decode", "--in", str(generations), "--out", str(tmp_path / "p.tsv"),
            "--schema", "seq2rel", "--report", str(report),
        ])
        assert code == 0
        assert "junk" in report.read_text(encoding="utf-8")

    def test_custom_noun_map(self, mini_corpus_dir, tmp_path):
        fixed = tmp_path / "fixed"
        run_cli(["repair", "--in", str(mini_corpus_dir), "--out", str(fixed)])
        noun_map = dict(
            produces="cause", increases_risk_of="risk factor", is_a="hyponym",
            is_acron="acronym", is_synon="synonym", anaphora="anaphor",
        )
        noun_path = tmp_path / "nouns.json"
        noun_path.write_text(json.dumps(noun_map), encoding="utf-8")
        records = tmp_path / "train.jsonl"
        run_cli([
            "encode", "--in", str(fixed), "--out", str(records),
            "--schema", "rel-is", "--noun-map", str(noun_path),
        ])
        text = records.read_text(encoding="utf-8")
        assert "is cause." in text


class TestScoreAndErrorsCommands:
    def test_hand_counted_score_fixture(self, tmp_path, capsys):
        a = Triple("alpha syndrome", "rare_disease", "produces", "tremor", "sign")
        b = Triple("alpha syndrome", "rare_disease", "is_a", "metabolic disorder", "disease")
        c = Triple("beta disease", "disease", "produces", "fever", "sign")
        write_triples_file({"d": [a, b]}, tmp_path / "gold.tsv")
        write_triples_file({"d": [a, c]}, tmp_path / "pred.tsv")
        code = run_cli(["score", "--gold", str(tmp_path / "gold.tsv"), "--pred", str(tmp_path / "pred.tsv")])
        assert code == 0
        micro = capsys.readouterr().out.strip().splitlines()[1].split()
        assert micro[1:4] == ["0.5000", "0.5000", "0.5000"]

    def test_errors_command_writes_audit(self, tmp_path, mini_corpus_dir, capsys):
        gold = Triple("Murovan disease", "rare_disease", "produces", "weakness in the muscles of the arms", "sign")
        pred = Triple("Murovan disease", "rare_disease", "produces", "muscle glowing", "sign")
        write_triples_file({"weakness": [gold]}, tmp_path / "gold.tsv")
        write_triples_file({"weakness": [pred]}, tmp_path / "pred.tsv")
        audit = tmp_path / "audit.jsonl"
        code = run_cli([
            "errors", "--gold", str(tmp_path / "gold.tsv"), "--pred", str(tmp_path / "pred.tsv"),
            "--audit", str(audit), "--docs", str(mini_corpus_dir),
        ])
        assert code == 0
        rows = [json.loads(line) for line in audit.read_text(encoding="utf-8").splitlines()]
        assert sorted(r["category"] for r in rows) == ["hallucinated_span", "missing"]
        out = capsys.readouterr().out
        assert "hallucinated_span: 1" in out


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert run_cli(["frobnicate"]) == 2
        capsys.readouterr()

    def test_missing_flag_is_usage_error(self, capsys):
        assert run_cli(["repair", "--in", "somewhere"]) == 2
        capsys.readouterr()

    def test_missing_input_is_fatal_error(self, tmp_path, capsys):
        code = run_cli(["repair", "--in", str(tmp_path / "nowhere"), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "nowhere" in capsys.readouterr().err

    def test_help_exits_zero(self, capsys):
        assert run_cli(["--help"]) == 0
        capsys.readouterr()

    def test_invalid_noun_map_is_fatal_not_a_traceback(self, mini_corpus_dir, tmp_path, capsys):
        bad = tmp_path / "nouns.json"
        bad.write_text('{"is_a": "parent"}', encoding="utf-8")
        code = run_cli([
            "encode", "--in", str(mini_corpus_dir), "--out", str(tmp_path / "o.jsonl"),
            "--schema", "rel-is", "--noun-map", str(bad),
        ])
        assert code == 1
        assert "noun map" in capsys.readouterr().err
