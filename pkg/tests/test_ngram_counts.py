import random
from collections import Counter

import pytest

from scripts.corpus import build_vocabulary
from scripts.ngram_counts import (
    BOS_ID,
    CountTable,
    context_stats,
    count_ngrams,
    counts_of_counts,
    validate_order,
)


def _table(sentences, order):
    vocab = build_vocabulary(sentences)
    return vocab, count_ngrams(sentences, vocab, order)


def test_validate_order_bounds():
    assert validate_order(1) == 1
    assert validate_order(5) == 5
    for bad in (0, 6, -1):
        with pytest.raises(ValueError):
            validate_order(bad)


def test_add_sentence_pads_with_bos_and_eos():
    vocab, table = _table([["a", "b"]], 3)
    a, b, eos = vocab.lookup("a"), vocab.lookup("b"), vocab.eos_id

    assert table.counts[0] == Counter({(a,): 1, (b,): 1, (eos,): 1})
    assert table.counts[1] == Counter({(BOS_ID, a): 1, (a, b): 1, (b, eos): 1})
    assert table.counts[2] == Counter(
        {(BOS_ID, BOS_ID, a): 1, (BOS_ID, a, b): 1, (a, b, eos): 1}
    )
    assert table.count((BOS_ID,)) == 0
    assert table.count(()) == 0


def test_empty_sentence_counts_end_of_sentence():
    vocab, table = _table([[]], 2)
    assert table.counts[1] == Counter({(BOS_ID, vocab.eos_id): 1})


def test_continuation_counts_use_distinct_left_extensions():
    vocab, table = _table([["a", "b"], ["a", "b"], ["a", "c"], ["c", "b"]], 2)
    a, b, c = (vocab.lookup(token) for token in "abc")

    continuation = table.continuation_counts(1)
    assert continuation[(b,)] == 2  # a b, c b
    assert continuation[(a,)] == 1  # <s> a
    assert continuation[(c,)] == 2  # a c, <s> c
    with pytest.raises(ValueError):
        table.continuation_counts(2)


def test_adjusted_counts_keep_raw_counts_after_bos():
    vocab, table = _table([["a", "b"], ["a", "b"], ["b"]], 3)
    a, b = vocab.lookup("a"), vocab.lookup("b")

    second = table.adjusted_counts(2)
    assert second[(BOS_ID, a)] == 2
    assert second[(BOS_ID, b)] == 1
    assert second[(a, b)] == 1
    top = table.adjusted_counts(3)
    assert top[(BOS_ID, BOS_ID, a)] == 2


def test_counts_of_counts_for_simple_corpus():
    _, table = _table([["a", "b"], ["a", "b"], ["a", "c"]], 2)
    # bigrams: <s> a ×3, a b ×2, b </s> ×2, a c ×1, c </s> ×1
    assert table.counts_of_counts(2) == (2, 2, 1, 0)
    assert counts_of_counts([1, 1, 2, 5, 4, 3]) == (2, 1, 1, 1)


def test_context_stats_split_types_by_adjusted_count():
    stats = context_stats({(1, 3): 1, (1, 4): 2, (1, 5): 7, (3, 4): 1})
    assert stats[(1,)].total == 10
    assert (stats[(1,)].n1, stats[(1,)].n2, stats[(1,)].n3plus) == (1, 1, 1)
    assert stats[(3,)].total == 1


def test_merge_is_pointwise_sum_and_leaves_operands():
    vocab = build_vocabulary([["a", "b", "c"]])
    left = count_ngrams([["a", "b"]], vocab, 2)
    right = count_ngrams([["b", "c"], ["a"]], vocab, 2)
    combined = count_ngrams([["a", "b"], ["b", "c"], ["a"]], vocab, 2)

    merged = left.merge(right)

    assert merged.counts == combined.counts
    assert right.merge(left).counts == combined.counts
    assert left.counts == count_ngrams([["a", "b"]], vocab, 2).counts
    with pytest.raises(ValueError):
        left.merge(CountTable(order=3))


def test_count_ngrams_is_independent_of_worker_count():
    rng = random.Random(7)
    sentences = [
        [rng.choice("abcdef") for _ in range(rng.randint(0, 6))] for _ in range(200)
    ]
    vocab = build_vocabulary(sentences)
    single = count_ngrams(sentences, vocab, 3)
    for workers in (2, 3, 8, 500):
        assert count_ngrams(sentences, vocab, 3, workers=workers).counts == single.counts
    with pytest.raises(ValueError):
        count_ngrams(sentences, vocab, 3, workers=0)


def test_count_table_rejects_mismatched_tables():
    with pytest.raises(ValueError):
        CountTable(order=2, counts=[Counter()])
    with pytest.raises(ValueError):
        CountTable(order=0)
