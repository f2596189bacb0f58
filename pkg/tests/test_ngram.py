import math
import random
from collections import Counter, defaultdict

import pytest

from prosobench.errors import FitError
from prosobench.ngram import (BOS, EOS, UNK, NgramModel, perplexity,
                              surprisal, surprisal_tsv, train)


class KneserNeyOracle:
    """Literal transcription of the interpolated KN equations.

    Kept deliberately independent of NgramModel: separate count tables,
    no shared helpers, trigram order hard-wired.
    """

    def __init__(self, utterances, discount=0.75, unk_cutoff=2):
        self.D = discount
        raw = Counter(w for u in utterances for w in u)
        self.vocab = {w for w, c in raw.items() if c >= unk_cutoff}
        self.pred_vocab = self.vocab | {UNK, EOS}

        self.tri = defaultdict(Counter)      # raw c(uvw)
        tri_types = set()
        bi_types = set()
        for utt in utterances:
            padded = [BOS, BOS] + [self.map(w) for w in utt] + [EOS]
            for i in range(2, len(padded)):
                u, v, w = padded[i - 2], padded[i - 1], padded[i]
                self.tri[(u, v)][w] += 1
                tri_types.add((u, v, w))
                bi_types.add((v, w))

        # continuation counts: distinct left extensions per suffix type
        self.cont_bi = defaultdict(Counter)  # N1+(. v w), keyed by v
        for u, v, w in tri_types:
            self.cont_bi[v][w] += 1
        self.cont_uni = Counter()            # N1+(. w)
        for v, w in bi_types:
            self.cont_uni[w] += 1

    def map(self, w):
        if w in (BOS, EOS):
            return w
        return w if w in self.vocab else UNK

    def p_uni(self, w):
        total = sum(self.cont_uni.values())
        lam = self.D * len(self.cont_uni) / total
        return (max(self.cont_uni[w] - self.D, 0.0) / total
                + lam / len(self.pred_vocab))

    def p_bi(self, w, v):
        counter = self.cont_bi.get(v)
        if counter is None:
            return self.p_uni(w)
        total = sum(counter.values())
        lam = self.D * len(counter) / total
        return max(counter[w] - self.D, 0.0) / total + lam * self.p_uni(w)

    def p_tri(self, w, u, v):
        counter = self.tri.get((u, v))
        if counter is None:
            return self.p_bi(w, v)
        total = sum(counter.values())
        lam = self.D * len(counter) / total
        return max(counter[w] - self.D, 0.0) / total + lam * self.p_bi(w, v)

    def prob(self, w, context):
        ctx = [self.map(x) for x in context]
        padded = ([BOS, BOS] + ctx)[-2:]
        return self.p_tri(self.map(w), padded[0], padded[1])


# 50 words, 5 utterances; "rare" and "once" occur a single time each -> UNK
FIXTURE = [
    "the cat sat on the mat and the cat slept".split(),
    "the dog sat on the mat and barked at night".split(),
    "a cat and a dog sat by the front door".split(),
    "the rare dog slept on the old mat at night".split(),
    "a dog barked once and the cat sat by me".split(),
]
assert sum(len(u) for u in FIXTURE) == 50


class TestOracleEquivalence:
    EVENTS = [
        ("sat", ["the", "cat"]),      # seen trigram
        ("mat", ["on", "the"]),       # seen, competing continuations
        ("dog", ["by", "a"]),         # unseen context, bigram backoff
        ("rare", ["the", "cat"]),     # UNK-mapped word
        ("night", []),                # empty context, BOS padding
    ]

    def test_hand_picked_events(self):
        model = train(FIXTURE, order=3)
        oracle = KneserNeyOracle(FIXTURE)
        for word, ctx in self.EVENTS:
            assert model.prob(word, ctx) == pytest.approx(
                oracle.prob(word, ctx), abs=1e-9), (word, ctx)

    def test_random_events(self):
        model = train(FIXTURE, order=3)
        oracle = KneserNeyOracle(FIXTURE)
        words = sorted({w for u in FIXTURE for w in u}) + ["zzz", EOS]
        rng = random.Random(7)
        for _ in range(200):
            ctx = [rng.choice(words) for _ in range(rng.randint(0, 3))]
            w = rng.choice(words)
            assert model.prob(w, ctx) == pytest.approx(
                oracle.prob(w, ctx), abs=1e-9)


class TestDistribution:
    def test_sums_to_one_random_contexts(self):
        model = train(FIXTURE, order=3)
        support = sorted(model.prediction_vocab())
        words = sorted({w for u in FIXTURE for w in u})
        rng = random.Random(3)
        for _ in range(100):
            ctx = [rng.choice(words) for _ in range(rng.randint(0, 2))]
            total = sum(model.prob(w, ctx) for w in support)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_unseen_word_maps_to_unk(self):
        model = train(FIXTURE, order=3)
        assert model.prob("xylophone", ["the"]) == model.prob(UNK, ["the"])


class TestUnigram:
    def test_two_word_mle(self):
        model = train([["a", "a", "b", "b"]], order=1)
        assert model.prob("a", []) == pytest.approx(0.5)
        assert model.prob("b", []) == pytest.approx(0.5)

    def test_uniform_four_word_perplexity(self):
        utts = [["w1", "w2", "w3", "w4"]] * 10
        model = train(utts, order=1)
        assert perplexity(model, utts) == pytest.approx(4.0, abs=1e-12)


class TestSurprisal:
    def test_deterministic_corpus_zero_bits(self):
        # order 1, single word type: p = 1 everywhere
        model = train([["go", "go", "go", "go"]], order=1)
        assert model.utterance_surprisal(["go", "go"]) == [0.0, 0.0]

    def test_quarter_probability_two_bits(self):
        model = train([["w1", "w2", "w3", "w4"]] * 10, order=1)
        bits = model.utterance_surprisal(["w1"])
        assert bits[0] == pytest.approx(2.0, abs=1e-12)

    def test_mean_surprisal_matches_perplexity(self):
        model = train(FIXTURE, order=3)
        bits = [s for u in FIXTURE for s in model.utterance_surprisal(u)]
        assert 2.0 ** (sum(bits) / len(bits)) == pytest.approx(
            perplexity(model, FIXTURE), rel=1e-12)

    def test_records_and_tsv(self):
        model = train(FIXTURE, order=3)
        records = surprisal(model, FIXTURE[0], speaker="s1", utterance_index=2)
        assert [r.token_index for r in records] == list(range(10))
        assert all(r.surprisal > 0 for r in records)
        lines = surprisal_tsv(records).splitlines()
        assert lines[0] == "speaker\tutt\tidx\tword\tsurprisal"
        assert lines[1].startswith("s1\t2\t0\tthe\t")


class TestPerplexity:
    def test_renaming_invariance(self):
        # consistent word renaming cannot change any count, hence any prob
        mapping = {w: "tok%d" % i
                   for i, w in enumerate(sorted({w for u in FIXTURE for w in u}))}
        renamed = [[mapping[w] for w in u] for u in FIXTURE]
        assert perplexity(train(FIXTURE, order=3), FIXTURE) == pytest.approx(
            perplexity(train(renamed, order=3), renamed), rel=1e-12)

    def test_training_set_beats_shuffled(self):
        rng = random.Random(5)
        flat = [w for u in FIXTURE for w in u]
        rng.shuffle(flat)
        shuffled = [flat[i:i + 10] for i in range(0, 50, 10)]
        model = train(FIXTURE, order=3)
        assert perplexity(model, FIXTURE) < perplexity(model, shuffled)

    def test_empty_eval_raises(self):
        with pytest.raises(FitError):
            perplexity(train(FIXTURE, order=3), [])


class TestFitting:
    def test_empty_training_raises(self):
        with pytest.raises(FitError):
            train([])

    def test_count_monotonicity(self):
        base = [["x", "y"], ["x", "y"], ["x", "z"], ["x", "z"]]
        more = base + [["x", "y"], ["x", "y"]]
        p_base = train(base, order=2).prob("y", ["x"])
        p_more = train(more, order=2).prob("y", ["x"])
        assert p_more > p_base

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            NgramModel(order=0)
        with pytest.raises(ValueError):
            NgramModel(discount=1.5)
