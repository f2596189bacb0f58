from proso_adapter.textdata import (load_utterances, mix_fifty_fifty,
                                    token_count, word_frequencies)


def test_load_utterances_skips_blank_lines():
    utts = load_utterances("a b c\n\n  \nd e\n")
    assert utts == [["a", "b", "c"], ["d", "e"]]


def test_token_count():
    assert token_count([["a", "b"], ["c"]]) == 3


def test_word_frequencies():
    freqs = word_frequencies([["a", "b", "a"], ["a"]])
    assert freqs["a"] == 3
    assert freqs["b"] == 1


class TestMixFiftyFifty:
    def test_equal_token_counts(self):
        a = [["a"] * 5] * 10   # 50 tokens
        b = [["b"] * 4] * 30   # 120 tokens
        mixed = mix_fifty_fifty(a, b)
        a_tokens = sum(1 for u in mixed for w in u if w == "a")
        b_tokens = sum(1 for u in mixed for w in u if w == "b")
        assert a_tokens == b_tokens == 50

    def test_boundary_utterance_is_cut(self):
        a = [["a"] * 7]                 # 7 tokens
        b = [["b"] * 4, ["b"] * 4]      # 8 tokens, budget 7
        mixed = mix_fifty_fifty(a, b)
        assert token_count(mixed) == 14
        assert [len(u) for u in mixed] == [7, 4, 3]

    def test_order_preserved(self):
        a = [["a1"], ["a2"]]
        b = [["b1"], ["b2"]]
        assert mix_fifty_fifty(a, b) == [["a1"], ["a2"], ["b1"], ["b2"]]
