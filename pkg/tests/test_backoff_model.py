import math

import pytest

from scripts.backoff_model import (
    LOG10_ZERO,
    BackoffModel,
    EmptyInput,
    SentenceScore,
    corpus_logprob,
    perplexity,
    prob,
    sentence_logprob,
)
from scripts.corpus import UnknownId, Vocabulary, build_vocabulary
from scripts.kneser_ney import discounts_for, train
from scripts.ngram_counts import BOS_ID, count_ngrams


def _train(sentences, order):
    vocab = build_vocabulary(sentences)
    counts = count_ngrams(sentences, vocab, order)
    return train(counts, discounts_for(counts), vocab, order)


def _uniform_unigram(words):
    vocab = Vocabulary.from_tokens(words)
    size = len(vocab) - 1
    table = {(token_id,): math.log10(1.0 / size) for token_id in range(len(vocab))}
    table[(BOS_ID,)] = LOG10_ZERO
    return BackoffModel(order=1, vocab=vocab, log_probs=[table], log_backoffs={})


def test_sentence_logprob_scores_tokens_and_end_marker():
    model = _train([["a", "b"], ["a"]], 2)
    vocab = model.vocab
    a = vocab.lookup("a")

    score = sentence_logprob(model, ["a"])

    expected = model.log10_prob(a, (BOS_ID,)) + model.log10_prob(vocab.eos_id, (a,))
    assert isinstance(score, SentenceScore)
    assert score.token_count == 2
    assert score.log10_prob == pytest.approx(expected, abs=1e-12)


def test_sentence_logprob_maps_oov_to_unk():
    model = _train([["a", "b"]], 3)
    score = sentence_logprob(model, ["zzz", "qqq"])
    assert math.isfinite(score.log10_prob)
    assert score.token_count == 3
    assert score == sentence_logprob(model, ["<unk>", "<unk>"])


def test_empty_sentence_scores_end_marker():
    model = _train([["a"], []], 2)
    score = sentence_logprob(model, [])
    assert score.token_count == 1
    assert score.log10_prob == pytest.approx(model.log10_prob(model.vocab.eos_id, (BOS_ID,)))
    with pytest.raises(EmptyInput):
        sentence_logprob(model, [], allow_empty=False)


def test_log10_prob_validates_ids():
    model = _train([["a"]], 2)
    size = len(model.vocab)
    with pytest.raises(UnknownId):
        model.log10_prob(size)
    with pytest.raises(UnknownId):
        model.log10_prob(0, (size + 3,))
    with pytest.raises(ValueError):
        model.log10_prob(BOS_ID)


def test_long_contexts_are_truncated():
    model = _train([["a", "b", "c"]], 2)
    a, b, c = (model.vocab.lookup(token) for token in "abc")
    assert model.log10_prob(c, (a, a, b)) == model.log10_prob(c, (b,))
    assert prob(model, c, (b,)) == pytest.approx(10 ** model.log10_prob(c, (b,)))


def test_log10_backoff_defaults_to_zero():
    model = _train([["a", "b"]], 2)
    assert model.log10_backoff((model.vocab.lookup("b"), 99)) == 0.0
    assert model.entry_count(1) == len(model.vocab)


def test_uniform_model_perplexity_equals_vocabulary_size():
    model = _uniform_unigram(["x", "y", "z"])
    size = len(model.vocab) - 1
    value = perplexity(model, [["x", "y"], ["z", "x", "y", "x"], []])
    assert value == pytest.approx(size)


def test_corpus_logprob_counts_positions():
    model = _train([["a", "b"], ["b"]], 2)
    total, positions, count = corpus_logprob(model, [["a", "b"], ["b"], []])
    assert positions == 3 + 2 + 1
    assert count == 3
    assert total == pytest.approx(
        sum(sentence_logprob(model, tokens).log10_prob for tokens in (["a", "b"], ["b"], []))
    )


def test_perplexity_requires_positions():
    model = _train([["a"]], 2)
    with pytest.raises(EmptyInput):
        perplexity(model, [])
    training = perplexity(model, [["a"]])
    assert math.isfinite(training)
    assert training >= 1.0


def test_model_rejects_inconsistent_tables():
    vocab = Vocabulary.from_tokens([])
    with pytest.raises(ValueError):
        BackoffModel(order=2, vocab=vocab, log_probs=[{}], log_backoffs={})
