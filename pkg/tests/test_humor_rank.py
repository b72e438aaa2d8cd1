import random

import pytest

from scripts.arpa import write_arpa
from scripts.backoff_model import sentence_logprob
from scripts.corpus import (
    HashtagSet,
    InvalidGoldLabels,
    Label,
    TweetRecord,
    build_vocabulary,
    tokenize,
    write_tweet_tsv,
)
from scripts.humor_rank import (
    EmptySet,
    EvalReport,
    ExperimentConfig,
    HashtagResult,
    NoPairs,
    PartitionMismatch,
    Polarity,
    SamePair,
    ScoredTweet,
    SemiRanking,
    compare_pair,
    eval_subtask_a,
    eval_subtask_b,
    evaluate,
    load_gold_sets,
    run_experiment,
    score_tweet,
    semi_rank,
)
from scripts.kneser_ney import discounts_for, train
from scripts.ngram_counts import count_ngrams

TRAINING = [["a", "b"], ["a", "a"], ["b"], ["a", "b", "a"]]


def _model(order=2):
    vocab = build_vocabulary(TRAINING)
    counts = count_ngrams(TRAINING, vocab, order)
    return train(counts, discounts_for(counts), vocab, order)


def _scored(tweet_id, score, token_count=1, gold=None):
    return ScoredTweet(
        tweet=TweetRecord(tweet_id=tweet_id, text="", gold=gold),
        log10_prob=score,
        token_count=token_count,
        score=score,
    )


def _label_for_rank(rank: int) -> Label:
    if rank == 0:
        return Label.TOP1
    return Label.NEXT9 if rank <= 9 else Label.REST


def _length_ordered_set(hashtag: str, count: int) -> HashtagSet:
    """Коротші твіти з повторів "a" мають вищу ймовірність, тож і вищу мітку."""

    return HashtagSet(
        hashtag=hashtag,
        tweets=tuple(
            TweetRecord(
                tweet_id=f"{hashtag}-{count - rank:02d}",
                text=" ".join(["a"] * (rank + 1)),
                gold=_label_for_rank(rank),
            )
            for rank in range(count)
        ),
    )


def test_polarity_names():
    assert Polarity.from_name("funny") is Polarity.HIGHER_IS_FUNNIER
    assert Polarity.from_name(" News ") is Polarity.LOWER_IS_FUNNIER
    with pytest.raises(ValueError):
        Polarity.from_name("sad")


def test_polarity_orientation_examples():
    assert Polarity.HIGHER_IS_FUNNIER.orient(-12.0) == -12.0
    assert Polarity.LOWER_IS_FUNNIER.orient(-12.0) == 12.0
    assert Polarity.HIGHER_IS_FUNNIER.orient(-12.0 / 6) == -2.0


def test_score_tweet_orients_and_normalizes():
    model = _model()
    tweet = TweetRecord("1", "A b a")
    expected = sentence_logprob(model, tokenize(tweet.text))

    funny = score_tweet(model, Polarity.HIGHER_IS_FUNNIER, False, tweet)
    news = score_tweet(model, Polarity.LOWER_IS_FUNNIER, False, tweet)
    per_token = score_tweet(model, Polarity.HIGHER_IS_FUNNIER, True, tweet)

    assert funny.score == expected.log10_prob
    assert news.score == -expected.log10_prob
    assert funny.token_count == 4
    assert per_token.score == pytest.approx(expected.log10_prob / 4)
    assert funny.tweet_id == "1"


def test_score_tweet_handles_empty_and_unknown_text():
    model = _model()
    empty = score_tweet(model, Polarity.HIGHER_IS_FUNNIER, False, TweetRecord("e", ""))
    unknown = score_tweet(model, Polarity.HIGHER_IS_FUNNIER, True, TweetRecord("u", "zzz qqq"))
    assert empty.token_count == 1
    assert unknown.token_count == 3
    assert unknown.score < 0


def test_compare_pair_examples():
    assert compare_pair(_scored("x", -3.0), _scored("y", -5.0)) == "x"
    assert compare_pair(_scored("b", -4.0), _scored("a", -4.0)) == "a"
    with pytest.raises(SamePair) as excinfo:
        compare_pair(_scored("same", -1.0), _scored("same", -2.0))
    assert excinfo.value.tweet_id == "same"


def test_flipping_polarity_reverses_strict_decisions():
    rng = random.Random(5)
    for index in range(200):
        first_log, second_log = rng.uniform(-30, 0), rng.uniform(-30, 0)
        pair = []
        for polarity in Polarity:
            first = ScoredTweet(TweetRecord("p", "x"), first_log, 3, polarity.orient(first_log))
            second = ScoredTweet(TweetRecord("q", "y"), second_log, 3, polarity.orient(second_log))
            pair.append(compare_pair(first, second))
        if first_log != second_log:
            assert pair[0] != pair[1], index
    tied = [
        compare_pair(
            ScoredTweet(TweetRecord("q", "x"), -2.0, 1, polarity.orient(-2.0)),
            ScoredTweet(TweetRecord("p", "y"), -2.0, 1, polarity.orient(-2.0)),
        )
        for polarity in Polarity
    ]
    assert tied == ["p", "p"]


def test_per_token_flag_keeps_winner_on_equal_lengths():
    rng = random.Random(8)
    for _ in range(100):
        count = rng.randint(1, 20)
        logs = rng.uniform(-40, 0), rng.uniform(-40, 0)
        raw = [
            ScoredTweet(TweetRecord(name, ""), value, count, value)
            for name, value in zip("ab", logs)
        ]
        normalized = [
            ScoredTweet(TweetRecord(name, ""), value, count, value / count)
            for name, value in zip("ab", logs)
        ]
        assert compare_pair(*raw) == compare_pair(*normalized)


@pytest.mark.parametrize("count", [1, 2, 5, 10, 11, 12, 50])
def test_semi_rank_bucket_sizes(count):
    scored = [_scored(f"t{index:03d}", -float(index)) for index in range(count)]
    random.Random(count).shuffle(scored)

    ranking = semi_rank(scored)

    assert len(ranking.next9) == min(9, count - 1)
    assert len(ranking.rest) == count - 1 - min(9, count - 1)
    assert sorted(ranking.ids()) == sorted(item.tweet_id for item in scored)
    assert ranking.top1 == "t000"


def test_semi_rank_orders_twelve_tweets():
    scored = [_scored(f"t{index:02d}", -float(index)) for index in range(12)]
    ranking = semi_rank(list(reversed(scored)))
    assert ranking.top1 == "t00"
    assert ranking.next9 == tuple(f"t{index:02d}" for index in range(1, 10))
    assert ranking.rest == ("t10", "t11")
    assert ranking.labels()["t05"] is Label.NEXT9


def test_semi_rank_breaks_ties_by_id_and_rejects_empty():
    ranking = semi_rank([_scored("y", -1.0), _scored("x", -1.0), _scored("z", -3.0)])
    assert ranking.top1 == "x"
    assert ranking.next9 == ("y", "z")
    with pytest.raises(EmptySet):
        semi_rank([])


def test_top_tweet_beats_every_other():
    rng = random.Random(13)
    scored = [_scored(f"id{index}", float(rng.randint(-5, 5))) for index in range(30)]
    ranking = semi_rank(scored)
    top = next(item for item in scored if item.tweet_id == ranking.top1)
    for item in scored:
        if item.tweet_id != top.tweet_id:
            assert compare_pair(top, item) == top.tweet_id


def _three_tweets(hashtag="h"):
    return HashtagSet(
        hashtag,
        (
            TweetRecord("a", "", Label.TOP1),
            TweetRecord("b", "", Label.NEXT9),
            TweetRecord("c", "", Label.REST),
        ),
    )


def _by_gold(first, second):
    return first.tweet_id if first.gold > second.gold else second.tweet_id


def test_eval_subtask_a_counts_distinct_label_pairs():
    gold = _three_tweets()
    assert eval_subtask_a([gold], _by_gold) == 1.0

    def one_wrong(first, second):
        if {first.tweet_id, second.tweet_id} == {"b", "c"}:
            return "c"
        return _by_gold(first, second)

    assert eval_subtask_a([gold], one_wrong) == pytest.approx(2 / 3)


def test_eval_subtask_a_pools_pairs_across_hashtags():
    def wrong_on_bc(first, second):
        if {first.tweet_id, second.tweet_id} == {"b", "c"}:
            return "c"
        return _by_gold(first, second)

    small = HashtagSet("small", (TweetRecord("a", "", Label.TOP1), TweetRecord("b", "", Label.NEXT9)))
    accuracy = eval_subtask_a([_three_tweets("big"), small], wrong_on_bc)
    # 3 of 4 pairs correct, not the mean of 2/3 and 1
    assert accuracy == pytest.approx(0.75)


def test_eval_subtask_a_depends_only_on_order():
    gold = _length_ordered_set("h", 12)
    rng = random.Random(1)
    scores = {record.tweet_id: rng.uniform(-10, 10) for record in gold.tweets}

    def comparator_for(transform):
        def compare(first, second):
            return compare_pair(
                _scored(first.tweet_id, transform(scores[first.tweet_id])),
                _scored(second.tweet_id, transform(scores[second.tweet_id])),
            )

        return compare

    plain = eval_subtask_a([gold], comparator_for(lambda value: value))
    shifted = eval_subtask_a([gold], comparator_for(lambda value: 3 * value + 7))
    cubed = eval_subtask_a([gold], comparator_for(lambda value: value**3))
    assert plain == shifted == cubed


def test_eval_subtask_a_errors():
    single = HashtagSet("one", (TweetRecord("a", "", Label.TOP1),))
    with pytest.raises(NoPairs):
        eval_subtask_a([single], _by_gold)
    with pytest.raises(NoPairs):
        eval_subtask_a([], _by_gold)
    unlabelled = HashtagSet("u", (TweetRecord("a", ""), TweetRecord("b", "")))
    with pytest.raises(InvalidGoldLabels):
        eval_subtask_a([unlabelled], _by_gold)


def test_eval_subtask_b_identity_and_swap():
    gold = _length_ordered_set("h", 11)
    labels = {record.tweet_id: record.gold for record in gold.tweets}
    top = next(tweet_id for tweet_id, label in labels.items() if label is Label.TOP1)
    rest = next(tweet_id for tweet_id, label in labels.items() if label is Label.REST)
    middle = tuple(tweet_id for tweet_id, label in labels.items() if label is Label.NEXT9)

    assert eval_subtask_b(gold, SemiRanking(top1=top, next9=middle, rest=(rest,))) == 0.0
    swapped = SemiRanking(top1=rest, next9=middle, rest=(top,))
    assert eval_subtask_b(gold, swapped) == pytest.approx(4 / 22)


def test_eval_subtask_b_rejects_foreign_partition():
    gold = _length_ordered_set("h", 3)
    ids = gold.ids()
    with pytest.raises(PartitionMismatch) as excinfo:
        eval_subtask_b(gold, SemiRanking(top1=ids[0], next9=(ids[1], "extra")))
    assert excinfo.value.extra == ("extra",)
    assert excinfo.value.missing == (ids[2],)
    with pytest.raises(PartitionMismatch):
        eval_subtask_b(gold, SemiRanking(top1=ids[0], next9=(ids[1], ids[1]), rest=(ids[2],)))


def test_eval_subtask_b_is_symmetric_between_bucketings():
    first = _length_ordered_set("h", 12)
    other_ranking = semi_rank([_scored(record.tweet_id, float(index)) for index, record in enumerate(first.tweets)])
    second = HashtagSet(
        "h",
        tuple(
            TweetRecord(record.tweet_id, record.text, other_ranking.labels()[record.tweet_id])
            for record in first.tweets
        ),
    )
    first_ranking = SemiRanking(
        top1=next(r.tweet_id for r in first.tweets if r.gold is Label.TOP1),
        next9=tuple(r.tweet_id for r in first.tweets if r.gold is Label.NEXT9),
        rest=tuple(r.tweet_id for r in first.tweets if r.gold is Label.REST),
    )
    forward = eval_subtask_b(first, other_ranking)
    backward = eval_subtask_b(second, first_ranking)
    assert forward == pytest.approx(backward)
    assert 0 < forward <= 1


def _random_bucketing(rng, ids):
    order = list(ids)
    rng.shuffle(order)
    return SemiRanking(top1=order[0], next9=tuple(order[1:10]), rest=tuple(order[10:]))


def _gold_from(hashtag, ids, ranking):
    labels = ranking.labels()
    return HashtagSet(
        hashtag, tuple(TweetRecord(tweet_id, f"text {tweet_id}", labels[tweet_id]) for tweet_id in ids)
    )


def test_eval_subtask_b_is_a_metric_over_bucketings():
    rng = random.Random(6)
    ids = [f"id{index:02d}" for index in range(12)]
    for _ in range(300):
        x, y, z = (_random_bucketing(rng, ids) for _ in range(3))
        # a bucketing that differs from x only inside the rest bucket
        same_as_x = SemiRanking(top1=x.top1, next9=x.next9, rest=tuple(reversed(x.rest)))
        gold_x = _gold_from("h", ids, x)
        gold_y = _gold_from("h", ids, y)

        assert eval_subtask_b(gold_x, x) == 0.0
        assert eval_subtask_b(gold_x, same_as_x) == 0.0
        assert (eval_subtask_b(gold_x, y) == 0.0) == (x.labels() == y.labels())
        assert eval_subtask_b(gold_x, z) <= (
            eval_subtask_b(gold_x, y) + eval_subtask_b(gold_y, z) + 1e-12
        )


def test_evaluate_is_perfect_when_gold_follows_scores():
    model = _model()
    sets = [_length_ordered_set(name, size) for name, size in (("b", 12), ("a", 5), ("c", 2))]

    report = evaluate(model, Polarity.HIGHER_IS_FUNNIER, False, sets)

    assert report.accuracy_a == 1.0
    assert report.distance_b == 0.0
    assert report.hashtag_count == 3
    assert [item.hashtag for item in report.per_hashtag] == ["a", "b", "c"]
    assert report.pair_count == sum(item.pair_count for item in report.per_hashtag)

    reversed_report = evaluate(model, Polarity.LOWER_IS_FUNNIER, False, sets)
    assert reversed_report.accuracy_a == 0.0


def test_evaluate_does_not_depend_on_workers():
    model = _model()
    sets = [_length_ordered_set(f"tag{index}", 3 + index) for index in range(6)]
    single = evaluate(model, Polarity.LOWER_IS_FUNNIER, True, sets, workers=1)
    parallel = evaluate(model, Polarity.LOWER_IS_FUNNIER, True, list(reversed(sets)), workers=4)
    assert single == parallel
    with pytest.raises(ValueError):
        evaluate(model, Polarity.LOWER_IS_FUNNIER, True, sets, workers=0)


def test_hashtag_result_without_pairs():
    result = HashtagResult(hashtag="solo", tweet_count=1, correct=0, pair_count=0, distance_b=0.0)
    assert result.accuracy_a is None
    assert result.as_dict()["accuracy_a"] is None


def test_report_serializes_contract_fields():
    report = EvalReport(
        accuracy_a=0.5,
        distance_b=0.25,
        pair_count=4,
        hashtag_count=1,
        per_hashtag=(HashtagResult("h", 3, 2, 4, 0.25),),
        model="m.arpa",
        polarity="news",
        per_token=True,
        skipped_files=({"path": "bad.tsv", "error": "boom"},),
    )
    data = report.as_dict()
    assert set(data) >= {"accuracy_a", "distance_b", "pair_count", "hashtag_count", "per_hashtag"}
    assert data["per_hashtag"][0]["hashtag"] == "h"
    assert data["skipped_files"] == [{"path": "bad.tsv", "error": "boom"}]


def test_run_experiment_reads_model_and_skips_bad_files(tmp_path):
    model_path = tmp_path / "tweets.arpa"
    write_arpa(_model(), model_path)
    gold_dir = tmp_path / "gold"
    gold_dir.mkdir()
    for name, size in (("first", 4), ("second", 11)):
        write_tweet_tsv(_length_ordered_set(name, size), gold_dir / f"{name}.tsv")
    (gold_dir / "broken.tsv").write_text("1\tonly\t7\n", encoding="utf-8")

    config = ExperimentConfig(name="tweets", model=model_path, polarity=Polarity.HIGHER_IS_FUNNIER)
    report = run_experiment(config, [gold_dir])

    assert report.accuracy_a == 1.0
    assert report.distance_b == 0.0
    assert report.hashtag_count == 2
    assert report.model == str(model_path)
    assert [item["path"] for item in report.skipped_files] == [str(gold_dir / "broken.tsv")]


def test_run_experiment_without_data_has_no_pairs(tmp_path):
    model_path = tmp_path / "m.arpa"
    write_arpa(_model(), model_path)
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(NoPairs):
        run_experiment(ExperimentConfig("m", model_path, Polarity.LOWER_IS_FUNNIER), [empty])


def test_load_gold_sets_rejects_invalid_partitions(tmp_path):
    bad = HashtagSet(
        "bad",
        (TweetRecord("1", "x", Label.TOP1), TweetRecord("2", "y", Label.TOP1)),
    )
    write_tweet_tsv(bad, tmp_path / "bad.tsv")
    (tmp_path / "empty.tsv").write_text("", encoding="utf-8")
    data = load_gold_sets([tmp_path])
    assert data.sets == []
    assert len(data.skipped_files) == 2
