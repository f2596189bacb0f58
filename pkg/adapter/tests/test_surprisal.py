import json
import math

import pytest
import torch

from prosobench import benchset
from prosobench.cli import main as prosobench_main

from proso_adapter.errors import ExportError
from proso_adapter.subtok import BOS_ID, EOS_ID, MASK_ID, encode_words
from proso_adapter.surprisal import (export_surprisal, read_benchmark_tsv,
                                     word_surprisals)

from gen import separable_sentences, to_conll


def gold_tsv_from(sentences):
    return benchset.gold_tsv(benchset.from_conll(to_conll(sentences),
                                                 "reduction"))


class TestReadBenchmarkTsv:
    def test_round_trip_from_primary_gold(self):
        sents = separable_sentences(4, seed=7)
        utts = read_benchmark_tsv(gold_tsv_from(sents))
        assert [[w for _, w in u] for u in utts] == [ws for ws, _ in sents]
        assert utts[2][1][0] == ("", 2, 1)

    def test_bad_header(self):
        with pytest.raises(ExportError):
            read_benchmark_tsv("word\tsurprisal\n")

    def test_bad_row(self):
        with pytest.raises(ExportError):
            read_benchmark_tsv("speaker\tutt\tidx\tword\ttag\ns\tx\t0\tw\tB\n")


class TestWordSurprisals:
    def test_single_subword_matches_direct_masking(self, tiny_checkpoint):
        tokenizer = tiny_checkpoint.load_tokenizer()
        model = tiny_checkpoint.load_mlm()
        words = ["w0", "w1", "w2", "w3"]
        pieces = encode_words(tokenizer, words)
        target = next(i for i, p in enumerate(pieces) if len(p) == 1)

        bits = word_surprisals(model, tokenizer, words, max_len=48)

        ids = [BOS_ID] + [i for p in pieces for i in p] + [EOS_ID]
        pos = 1 + sum(len(p) for p in pieces[:target])
        masked = list(ids)
        masked[pos] = MASK_ID
        model.eval()
        with torch.no_grad():
            logits = model(input_ids=torch.tensor([masked])).logits[0]
        expected = -float(torch.log_softmax(logits[pos], dim=-1)
                          [pieces[target][0]]) / math.log(2.0)
        assert bits[target] == pytest.approx(expected, abs=1e-6)

    def test_window_overflow(self, tiny_checkpoint):
        tokenizer = tiny_checkpoint.load_tokenizer()
        model = tiny_checkpoint.load_mlm()
        with pytest.raises(ExportError):
            word_surprisals(model, tokenizer, ["w0"] * 60, max_len=48)


class TestExport:
    def test_schema_and_row_count(self, tiny_checkpoint):
        sents = separable_sentences(3, seed=8)
        tsv = export_surprisal(tiny_checkpoint, gold_tsv_from(sents))
        lines = tsv.strip().splitlines()
        assert lines[0] == "speaker\tutt\tidx\tword\tsurprisal"
        assert len(lines) == 1 + sum(len(ws) for ws, _ in sents)
        for line in lines[1:]:
            cols = line.split("\t")
            assert len(cols) == 5
            assert math.isfinite(float(cols[4]))

    def test_deterministic(self, tiny_checkpoint):
        gold = gold_tsv_from(separable_sentences(3, seed=9))
        assert (export_surprisal(tiny_checkpoint, gold)
                == export_surprisal(tiny_checkpoint, gold))

    def test_identical_utterances_get_identical_values(self, tiny_checkpoint):
        words, tags = separable_sentences(1, seed=11)[0]
        gold = gold_tsv_from([(words, tags), (words, tags)])
        tsv = export_surprisal(tiny_checkpoint, gold)
        values = [line.split("\t")[4] for line in tsv.strip().splitlines()[1:]]
        assert values[:len(words)] == values[len(words):]


def test_primary_correlate_accepts_export(tiny_checkpoint, tmp_path):
    sents = separable_sentences(10, seed=12)
    gold = gold_tsv_from(sents)
    (tmp_path / "gold.tsv").write_text(gold, encoding="utf-8")
    (tmp_path / "surprisal.tsv").write_text(
        export_surprisal(tiny_checkpoint, gold), encoding="utf-8")
    (tmp_path / "config.json").write_text(
        json.dumps({"language": "en", "out": str(tmp_path / "out")}),
        encoding="utf-8")
    code = prosobench_main(["--config", str(tmp_path / "config.json"),
                            "correlate",
                            "--gold", str(tmp_path / "gold.tsv"),
                            "--surprisal", str(tmp_path / "surprisal.tsv")])
    assert code == 0
    report = json.loads((tmp_path / "out" / "correlation.json").read_text())
    assert -1.0 <= report["r"] <= 1.0
