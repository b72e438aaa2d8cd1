"""Оцінювання гумору твітів мовними моделями.

Humor ranking with language models: per-tweet scores with an explicit
polarity, pairwise comparison (Subtask A), semi-ranking into three buckets
(Subtask B) and the evaluation report.

Модель смішних твітів вважає смішнішим текст із вищою ймовірністю, а
новинна модель навпаки: смішнішим є менш імовірний для новин текст.
Після орієнтації більший бал завжди означає «смішніше».
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

try:  # pragma: no cover
    from .arpa import read_arpa
    from .backoff_model import BackoffModel, sentence_logprob
    from .corpus import (
        HashtagSet,
        InvalidGoldLabels,
        Label,
        TweetRecord,
        ingest_tweet_tsv,
        tokenize,
    )
    from .utils import HumorLMError, expand_paths
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.arpa import read_arpa
    from scripts.backoff_model import BackoffModel, sentence_logprob
    from scripts.corpus import (
        HashtagSet,
        InvalidGoldLabels,
        Label,
        TweetRecord,
        ingest_tweet_tsv,
        tokenize,
    )
    from scripts.utils import HumorLMError, expand_paths

logger = logging.getLogger(__name__)

NEXT9_SIZE = 9


class SamePair(HumorLMError):
    """Твіт не можна порівнювати сам із собою."""

    def __init__(self, tweet_id: str) -> None:
        super().__init__(f"Пара складається з одного й того самого твіту '{tweet_id}'")
        self.tweet_id = tweet_id


class EmptySet(HumorLMError):
    def __init__(self, hashtag: str = "") -> None:
        label = f" '{hashtag}'" if hashtag else ""
        super().__init__(f"Набір твітів{label} порожній")
        self.hashtag = hashtag


class NoPairs(HumorLMError):
    """Жоден хештег не дав пари твітів із різними еталонними мітками."""

    def __init__(self) -> None:
        super().__init__("Немає жодної пари твітів із різними еталонними мітками")


class PartitionMismatch(HumorLMError):
    def __init__(self, hashtag: str, missing: Sequence[str], extra: Sequence[str]) -> None:
        super().__init__(
            f"Розбиття для '{hashtag}' не збігається з еталоном: "
            f"бракує {sorted(missing)}, зайві {sorted(extra)}"
        )
        self.hashtag = hashtag
        self.missing = tuple(sorted(missing))
        self.extra = tuple(sorted(extra))


class Polarity(Enum):
    """Напрям бала: яка ймовірність означає «смішніше»."""

    HIGHER_IS_FUNNIER = "funny"
    LOWER_IS_FUNNIER = "news"

    @classmethod
    def from_name(cls, name: str) -> Polarity:
        """Перетворює назву ``funny``/``news`` на полярність."""

        try:
            return cls(name.strip().lower())
        except ValueError as exc:
            raise ValueError(f"Невідома полярність '{name}': очікувалось funny або news") from exc

    def orient(self, value: float) -> float:
        return value if self is Polarity.HIGHER_IS_FUNNIER else -value


@dataclass(frozen=True)
class ScoredTweet:
    """Твіт з оцінкою моделі; більший ``score`` означає смішніший твіт."""

    tweet: TweetRecord
    log10_prob: float
    token_count: int
    score: float

    @property
    def tweet_id(self) -> str:
        return self.tweet.tweet_id


def score_tweet(
    model: BackoffModel, polarity: Polarity, normalize: bool, tweet: TweetRecord
) -> ScoredTweet:
    """Оцінює твіт і орієнтує бал відповідно до полярності.

    Score a tweet under ``model``. With ``normalize`` the log probability is
    divided by the number of scored positions before orientation.
    """

    result = sentence_logprob(model, tokenize(tweet.text))
    value = result.log10_prob / result.token_count if normalize else result.log10_prob
    return ScoredTweet(
        tweet=tweet,
        log10_prob=result.log10_prob,
        token_count=result.token_count,
        score=polarity.orient(value),
    )


def score_hashtag(
    model: BackoffModel, polarity: Polarity, normalize: bool, hashtag_set: HashtagSet
) -> list[ScoredTweet]:
    return [score_tweet(model, polarity, normalize, tweet) for tweet in hashtag_set.tweets]


def _rank_key(item: ScoredTweet) -> tuple[float, str]:
    return -item.score, item.tweet_id


def compare_pair(a: ScoredTweet, b: ScoredTweet) -> str:
    """Повертає ідентифікатор смішнішого твіту.

    The higher score wins; an exact tie goes to the lexicographically smaller
    tweet id.
    """

    if a.tweet_id == b.tweet_id:
        raise SamePair(a.tweet_id)
    return min(a, b, key=_rank_key).tweet_id


@dataclass(frozen=True)
class SemiRanking:
    """Розбиття твітів хештегу на Top1, Next9 та решту."""

    top1: str
    next9: tuple[str, ...] = ()
    rest: tuple[str, ...] = ()

    def ids(self) -> list[str]:
        return [self.top1, *self.next9, *self.rest]

    def labels(self) -> dict[str, Label]:
        """Відображення tweet_id → мітка кошика."""

        labels = {self.top1: Label.TOP1}
        labels.update((tweet_id, Label.NEXT9) for tweet_id in self.next9)
        labels.update((tweet_id, Label.REST) for tweet_id in self.rest)
        return labels


def semi_rank(scored: Sequence[ScoredTweet]) -> SemiRanking:
    """Сортує твіти за спаданням бала і ділить на три кошики.

    Sort by descending score (ties by ascending tweet id) and split into the
    top tweet, the next ``min(9, n - 1)`` tweets and the rest.
    """

    if not scored:
        raise EmptySet()
    ordered = [item.tweet_id for item in sorted(scored, key=_rank_key)]
    return SemiRanking(
        top1=ordered[0],
        next9=tuple(ordered[1 : 1 + NEXT9_SIZE]),
        rest=tuple(ordered[1 + NEXT9_SIZE :]),
    )


Comparator = Callable[[TweetRecord, TweetRecord], str]


def count_correct_pairs(gold: HashtagSet, comparator: Comparator) -> tuple[int, int]:
    """Повертає (правильні, усі) пари з різними мітками в одному хештегу."""

    correct = 0
    total = 0
    for a, b in combinations(gold.tweets, 2):
        if a.gold is None or b.gold is None or a.gold == b.gold:
            continue
        total += 1
        expected = a.tweet_id if a.gold > b.gold else b.tweet_id
        if comparator(a, b) == expected:
            correct += 1
    return correct, total


def eval_subtask_a(gold_sets: Iterable[HashtagSet], comparator: Comparator) -> float:
    """Точність попарного порівняння, зведена по всіх парах усіх хештегів.

    Accuracy pooled over every unordered pair with distinct gold labels;
    it is not the mean of per-hashtag accuracies. Pairs only need labels, so
    the 1/9/rest shape of each set is not checked here.
    """

    correct = 0
    total = 0
    for gold in gold_sets:
        if not gold.has_gold:
            raise InvalidGoldLabels(gold.hashtag, "не всі твіти мають еталонні мітки")
        hit, seen = count_correct_pairs(gold, comparator)
        correct += hit
        total += seen
    if total == 0:
        raise NoPairs()
    return correct / total


def eval_subtask_b(gold: HashtagSet, predicted: SemiRanking) -> float:
    """Відстань між еталонним і передбаченим розбиттям у межах [0, 1].

    Distance = Σ|gold − predicted| / (2·n) over the numeric bucket labels
    (Top1 = 2, Next9 = 1, Rest = 0).
    """

    gold.validate_gold()
    expected = gold.gold_labels()
    actual = predicted.labels()
    if len(actual) != len(predicted.ids()) or expected.keys() != actual.keys():
        raise PartitionMismatch(
            gold.hashtag,
            missing=[tweet_id for tweet_id in expected if tweet_id not in actual],
            extra=[tweet_id for tweet_id in actual if tweet_id not in expected],
        )
    deviation = sum(abs(int(label) - int(actual[tweet_id])) for tweet_id, label in expected.items())
    return deviation / (2 * len(expected))


@dataclass(frozen=True)
class HashtagResult:
    """Підсумок оцінювання одного хештегу."""

    hashtag: str
    tweet_count: int
    correct: int
    pair_count: int
    distance_b: float

    @property
    def accuracy_a(self) -> float | None:
        if self.pair_count == 0:
            return None
        return self.correct / self.pair_count

    def as_dict(self) -> dict[str, Any]:
        return {
            "hashtag": self.hashtag,
            "tweet_count": self.tweet_count,
            "correct": self.correct,
            "pair_count": self.pair_count,
            "accuracy_a": self.accuracy_a,
            "distance_b": self.distance_b,
        }


@dataclass(frozen=True)
class EvalReport:
    """Зведений звіт однієї конфігурації моделі.

    ``accuracy_a`` is pooled over pairs, ``distance_b`` is the mean of the
    per-hashtag distances.
    """

    accuracy_a: float
    distance_b: float
    pair_count: int
    hashtag_count: int
    per_hashtag: tuple[HashtagResult, ...]
    model: str = ""
    polarity: str = Polarity.HIGHER_IS_FUNNIER.value
    per_token: bool = False
    skipped_files: tuple[dict[str, str], ...] = ()

    def as_dict(self) -> dict[str, Any]:
        return {
            "accuracy_a": self.accuracy_a,
            "distance_b": self.distance_b,
            "pair_count": self.pair_count,
            "hashtag_count": self.hashtag_count,
            "per_hashtag": [item.as_dict() for item in self.per_hashtag],
            "model": self.model,
            "polarity": self.polarity,
            "per_token": self.per_token,
            "skipped_files": [dict(item) for item in self.skipped_files],
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Одна конфігурація експерименту: модель, полярність і нормалізація."""

    name: str
    model: Path
    polarity: Polarity
    per_token: bool = False


@dataclass
class GoldData:
    """Мічені хештеги, прочитані з каталогу, і файли, які не вдалося прочитати."""

    sets: list[HashtagSet] = field(default_factory=list)
    skipped_files: list[dict[str, str]] = field(default_factory=list)


def load_gold_sets(paths: Iterable[Path]) -> GoldData:
    """Читає файли ``<hashtag>.tsv`` з еталонними мітками.

    Load labelled hashtag files; directories expand to their ``*.tsv`` files.
    A file that fails to parse or violates the gold invariant is skipped with
    a warning and recorded in ``skipped_files``.
    """

    data = GoldData()
    for path in expand_paths(paths, suffix=".tsv"):
        try:
            hashtag_set = ingest_tweet_tsv(path)
            if not len(hashtag_set):
                raise EmptySet(hashtag_set.hashtag)
            hashtag_set.validate_gold()
        except HumorLMError as exc:
            logger.warning("Пропущено %s: %s", path, exc)
            data.skipped_files.append({"path": str(path), "error": str(exc)})
            continue
        data.sets.append(hashtag_set)
    data.sets.sort(key=lambda item: item.hashtag)
    return data


def evaluate_hashtag(
    model: BackoffModel, polarity: Polarity, normalize: bool, gold: HashtagSet
) -> HashtagResult:
    """Оцінює обидві підзадачі на одному міченому хештегу."""

    scored = {item.tweet_id: item for item in score_hashtag(model, polarity, normalize, gold)}
    correct, pairs = count_correct_pairs(
        gold, lambda a, b: compare_pair(scored[a.tweet_id], scored[b.tweet_id])
    )
    distance = eval_subtask_b(gold, semi_rank(list(scored.values())))
    return HashtagResult(
        hashtag=gold.hashtag,
        tweet_count=len(gold),
        correct=correct,
        pair_count=pairs,
        distance_b=distance,
    )


def evaluate(
    model: BackoffModel,
    polarity: Polarity,
    normalize: bool,
    gold_sets: Sequence[HashtagSet],
    *,
    workers: int = 1,
) -> EvalReport:
    """Оцінює модель на наборі хештегів; результат не залежить від ``workers``.

    Hashtags are scored in a thread pool and reduced in hashtag-name order.
    """

    if workers < 1:
        raise ValueError("Кількість потоків має бути не меншою за 1")
    ordered = sorted(gold_sets, key=lambda item: item.hashtag)

    def _evaluate(gold: HashtagSet) -> HashtagResult:
        return evaluate_hashtag(model, polarity, normalize, gold)

    if workers == 1 or len(ordered) < 2:
        results = [_evaluate(gold) for gold in ordered]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(ordered))) as pool:
            results = list(pool.map(_evaluate, ordered))

    correct = sum(item.correct for item in results)
    pairs = sum(item.pair_count for item in results)
    if pairs == 0:
        raise NoPairs()
    distance = sum(item.distance_b for item in results) / len(results)
    return EvalReport(
        accuracy_a=correct / pairs,
        distance_b=distance,
        pair_count=pairs,
        hashtag_count=len(results),
        per_hashtag=tuple(results),
        polarity=polarity.value,
        per_token=normalize,
    )


def run_experiment(
    config: ExperimentConfig,
    data: GoldData | Iterable[Path],
    *,
    workers: int = 1,
) -> EvalReport:
    """Запускає одну конфігурацію: читає модель, оцінює всі мічені хештеги.

    Load the configured ARPA model, evaluate both subtasks over the labelled
    data and return the report with the model path and skipped files filled in.
    """

    if not isinstance(data, GoldData):
        data = load_gold_sets(data)
    model = read_arpa(config.model)
    logger.info("Експеримент %s: %d хештегів", config.name or config.model, len(data.sets))
    report = evaluate(model, config.polarity, config.per_token, data.sets, workers=workers)
    return replace(report, model=str(config.model), skipped_files=tuple(data.skipped_files))
