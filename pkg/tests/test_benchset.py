import math
import random

import pytest

from prosobench.benchset import (dataset_from_rows, dataset_stats, decode_bio,
                                 emit_bio, encode_bio, folds_from_counts,
                                 from_conll, gold_tsv, group_records,
                                 make_folds, split_by_fold, to_conll)
from prosobench.errors import FoldError

from gen import multi_speaker_corpus


class TestFolds:
    def test_sixteen_equal_speakers_two_per_fold(self):
        corpus = multi_speaker_corpus(n_speakers=16)
        folds = make_folds(corpus, k=8)
        sizes = [0] * 8
        for fold in folds.mapping.values():
            sizes[fold] += 1
        assert sizes == [2] * 8

    def test_greedy_trace(self):
        folds = folds_from_counts({"a": 100, "b": 50, "c": 50}, k=2)
        assert folds.mapping["a"] == 0
        assert folds.mapping["b"] == 1
        assert folds.mapping["c"] == 1

    def test_deterministic(self):
        corpus = multi_speaker_corpus(n_speakers=10)
        assert make_folds(corpus, k=4, seed=1) == make_folds(corpus, k=4, seed=1)

    def test_too_few_speakers(self):
        with pytest.raises(FoldError):
            folds_from_counts({"a": 10, "b": 10}, k=8)

    def test_no_speaker_in_two_folds(self):
        corpus = multi_speaker_corpus(n_speakers=16)
        folds = make_folds(corpus, k=8)
        assert len(folds.mapping) == 16  # dict keys are unique by construction

    def test_balance_within_quarter_of_mean(self):
        corpus = multi_speaker_corpus(n_speakers=16)
        folds = make_folds(corpus, k=8)
        counts = {s: 0 for s in folds.mapping}
        for tok in corpus.tokens():
            counts[tok.speaker_id] += 1
        loads = [0] * 8
        for s, f in folds.mapping.items():
            loads[f] += counts[s]
        mean = sum(loads) / 8
        assert all(abs(l - mean) <= 0.25 * mean for l in loads)


class TestBio:
    @pytest.mark.parametrize("labels,tags", [
        ([False, True, True, False], ["O", "B", "I", "O"]),
        ([True], ["B"]),
        ([True, False, True], ["B", "O", "B"]),
        ([], []),
    ])
    def test_encode(self, labels, tags):
        assert encode_bio(labels) == tags

    def test_round_trip_random_sequences(self):
        rng = random.Random(0)
        for _ in range(10_000):
            labels = [rng.random() < 0.3 for _ in range(rng.randint(1, 12))]
            assert decode_bio(encode_bio(labels)) == labels

    def test_i_never_follows_o_or_start(self):
        rng = random.Random(1)
        for _ in range(500):
            labels = [rng.random() < 0.5 for _ in range(rng.randint(1, 8))]
            tags = encode_bio(labels)
            assert tags[0] != "I"
            for prev, cur in zip(tags, tags[1:]):
                if cur == "I":
                    assert prev in ("B", "I")

    def test_emit_bio_dataset(self):
        utts = [[(("s0", 0, 0), "hello", False), (("s0", 0, 1), "there", True)],
                [(("s0", 1, 0), "yes", True)]]
        dataset = emit_bio(utts, "reduction")
        assert [s.tags for s in dataset.sentences] == [["O", "B"], ["B"]]
        assert dataset.n_tokens() == 3

    def test_conll_round_trip_and_line_count(self):
        utts = [[(("s0", 0, 0), "a", True), (("s0", 0, 1), "b", True)],
                [(("s0", 1, 0), "c", False)]]
        dataset = emit_bio(utts, "prominence")
        text = to_conll(dataset)
        # token lines + one blank separator between the two utterances
        assert len(text.rstrip("\n").split("\n")) == 3 + 1
        again = from_conll(text, "prominence")
        assert [s.tags for s in again.sentences] == [["B", "I"], ["O"]]


class TestStats:
    def make_dataset(self, n_tokens=100, n_pos=14):
        labels = [i < n_pos for i in range(n_tokens)]
        utts = [[(("spk%d" % (i // 10), i // 10, i % 10), "w%d" % i, lab)]
                for i, lab in enumerate(labels)]
        # 10 tokens per utterance
        grouped = []
        for i in range(0, n_tokens, 10):
            grouped.append([(("spk%d" % (i // 10), i // 10, j), "w", labels[i + j])
                            for j in range(10)])
        return emit_bio(grouped, "reduction")

    def test_positive_rate(self):
        stats = dataset_stats(self.make_dataset())
        assert stats["positive_rate"] == pytest.approx(0.14)
        assert stats["n_tokens"] == 100
        assert stats["mean_utterance_length"] == pytest.approx(10.0)

    def test_per_fold_rates_average_to_global(self):
        dataset = self.make_dataset()
        counts = {"spk%d" % i: 10 for i in range(10)}
        folds = folds_from_counts(counts, k=5)
        stats = dataset_stats(dataset, folds)
        weighted = sum(f["positive_rate"] * f["n_tokens"]
                       for f in stats["per_fold"].values())
        assert weighted / stats["n_tokens"] == pytest.approx(stats["positive_rate"])

    def test_empty_fold_reports_nan_with_warning(self):
        dataset = self.make_dataset()
        counts = {"spk%d" % i: 10 for i in range(10)}
        folds = folds_from_counts(counts, k=5)
        folds.mapping.update({s: 0 for s in folds.mapping if folds.mapping[s] == 4})
        folds.mapping["spk0"] = 0
        # force fold 4 empty
        for s in list(folds.mapping):
            if folds.mapping[s] == 4:
                folds.mapping[s] = 0
        stats = dataset_stats(dataset, folds)
        assert math.isnan(stats["per_fold"][4]["positive_rate"])
        assert any("fold 4" in w for w in stats["warnings"])


def test_group_records_and_gold_tsv():
    from prosobench.duration import ReductionRecord
    from gen import build_token
    toks = [build_token("hi", 0.0, [0.1], speaker="s0", utt=0, idx=0),
            build_token("yo", 0.2, [0.1], speaker="s0", utt=0, idx=1),
            build_token("ok", 0.5, [0.1], speaker="s0", utt=1, idx=0)]
    records = [ReductionRecord("r", t, 0.1, 0.2, 0.5, i == 1)
               for i, t in enumerate(toks)]
    utts = group_records(records)
    assert [len(u) for u in utts] == [2, 1]
    dataset = emit_bio(utts, "reduction")
    text = gold_tsv(dataset)
    lines = text.splitlines()
    assert lines[0] == "speaker\tutt\tidx\tword\ttag"
    assert lines[2] == "s0\t0\t1\tyo\tB"
    rows = [((c[0], int(c[1]), int(c[2])), c[3], c[4])
            for c in (l.split("\t") for l in lines[1:])]
    rebuilt = dataset_from_rows(rows, "reduction")
    assert gold_tsv(rebuilt) == text


def test_split_by_fold_partitions_sentences():
    utts = [[(("a", 0, 0), "x", True)], [(("b", 0, 0), "y", False)]]
    dataset = emit_bio(utts, "reduction")
    folds = folds_from_counts({"a": 1, "b": 1}, k=2)
    parts = split_by_fold(dataset, folds)
    assert sum(p.n_tokens() for p in parts.values()) == 2
    speakers = {p.sentences[0].provenance[0][0]
                for p in parts.values() if p.sentences}
    assert speakers == {"a", "b"}
