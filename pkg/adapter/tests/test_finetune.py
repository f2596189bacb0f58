import json
import random

import pytest

from prosobench import benchset
from prosobench.evaluate import (collapse_subwords, parse_prediction_tsv,
                                 check_alignment, gold_tokens,
                                 random_baseline, score)

from proso_adapter.conll import encode_bio, prediction_tsv, read_conll
from proso_adapter.errors import ExportError, TrainingError
from proso_adapter.finetune import (f1_positive, finetune_and_export,
                                    majority_collapse)
from proso_adapter.pretrain import pretrain
from proso_adapter.specs import FinetuneGrid, PretrainSpec

from gen import NEG_WORDS, POS_WORDS, random_utterances, separable_sentences, to_conll


class TestConll:
    def test_read_round_trip_with_primary_writer(self):
        sents = separable_sentences(5, seed=2)
        parsed = read_conll(to_conll(sents))
        assert parsed == sents

    def test_bad_line(self):
        with pytest.raises(ExportError):
            read_conll("word\tB\textra\n")

    def test_encode_bio(self):
        assert encode_bio([False, True, True, False]) == ["O", "B", "I", "O"]

    def test_prediction_tsv_matches_primary_provenance(self):
        sents = [(["a", "b"], ["B", "O"]), (["c"], ["O"])]
        pred = parse_prediction_tsv(prediction_tsv(sents))
        gold = gold_tokens(benchset.from_conll(to_conll(sents), "reduction"))
        check_alignment(gold, pred.tokens)


class TestMajorityVote:
    def test_tie_positive(self):
        assert majority_collapse([True, False]) is True

    def test_minority_negative(self):
        assert majority_collapse([True, False, False]) is False

    def test_agrees_with_primary_on_random_votes(self):
        rng = random.Random(0)
        for _ in range(500):
            votes = [rng.random() < 0.5 for _ in range(rng.randint(1, 7))]
            rows = [(("s", 0, 0), "w", "B" if v else "O") for v in votes]
            primary = collapse_subwords(rows)[0][2] == "B"
            assert majority_collapse(votes) == primary


class TestF1:
    def test_hand_worked_half(self):
        assert f1_positive(["B", "O", "O", "I"], ["B", "O", "B", "O"]) == 0.5

    def test_perfect(self):
        assert f1_positive(["B", "I", "O"], ["B", "I", "O"]) == 1.0

    def test_no_true_positives(self):
        assert f1_positive(["B"], ["O"]) == 0.0


@pytest.fixture(scope="module")
def grid_run(tmp_path_factory):
    """Pretrain on the separable vocabulary and run the full 10-cell grid."""
    vocab = POS_WORDS + NEG_WORDS
    train = random_utterances(500, seed=5, vocab=vocab)
    dev = random_utterances(40, seed=6, vocab=vocab)
    spec = PretrainSpec(epochs=30, vocab_size=150, hidden_size=64,
                        num_layers=2, num_heads=2, max_len=48)
    base = tmp_path_factory.mktemp("grid")
    checkpoint = pretrain(spec, train, dev, base / "ck")
    folds = [to_conll(separable_sentences(80, seed=10 + i)) for i in range(2)]
    result = finetune_and_export(checkpoint, folds, FinetuneGrid(),
                                 base / "ft", epochs=30, seed=0)
    return folds, result, base / "ft"


class TestGrid:
    def test_exactly_ten_runs(self, grid_run):
        _, result, out = grid_run
        assert len(result.cells) == 10
        log = json.loads((out / "grid_log.json").read_text())
        assert len(log["cells"]) == 10

    def test_separable_task_beats_random_baseline(self, grid_run):
        folds, result, _ = grid_run
        tags = [t for text in folds for _, ts in read_conll(text) for t in ts]
        q = sum(t in ("B", "I") for t in tags) / len(tags)
        baseline, _ = random_baseline(q, n_tokens=100_000, n_trials=50, seed=0)
        assert result.winner.mean_f1 - baseline >= 0.3

    def test_exports_pass_primary_scorer(self, grid_run):
        folds, result, _ = grid_run
        winner = result.winner
        for fi, (fold_text, path) in enumerate(
                zip(folds, winner.prediction_files)):
            gold = benchset.from_conll(fold_text, "reduction")
            pred = parse_prediction_tsv(open(path, encoding="utf-8").read(),
                                        "reduction", "adapter")
            report = score(gold, pred)
            # primary referee reproduces the adapter's own fold F1
            assert report.per_fold[0].f1 == pytest.approx(winner.fold_f1[fi])

    def test_every_cell_exports_every_fold(self, grid_run):
        _, result, out = grid_run
        for ci, cell in enumerate(result.cells):
            assert len(cell.prediction_files) == 2
        assert len(list(out.glob("pred.cell*.tsv"))) == 20


def test_too_few_folds(tiny_checkpoint, tmp_path):
    with pytest.raises(TrainingError):
        finetune_and_export(tiny_checkpoint,
                            [to_conll(separable_sentences(4))],
                            FinetuneGrid(), tmp_path / "ft")
