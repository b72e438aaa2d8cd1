"""Підрахунок n-грам і похідна статистика для згладжування Кнезера–Нея.

N-gram counting and the derived statistics used by Kneser-Ney smoothing.

Кожне речення доповнюється ``order - 1`` токенами ``<s>`` зліва та одним
``</s>`` справа; рахуються лише n-грами, що завершуються на реальному
токені або ``</s>`` (``<s>`` ніколи не є прогнозованим словом).
"""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

try:  # pragma: no cover
    from .corpus import Vocabulary
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.corpus import Vocabulary

logger = logging.getLogger(__name__)

MIN_ORDER = 1
MAX_ORDER = 5
BOS_ID = 1

Ngram = tuple[int, ...]


def validate_order(order: int) -> int:
    """Перевіряє, що порядок моделі лежить у межах [1, 5]."""

    if not MIN_ORDER <= order <= MAX_ORDER:
        raise ValueError(f"Порядок n-грам має бути в межах [{MIN_ORDER}, {MAX_ORDER}], отримано {order}")
    return order


@dataclass(frozen=True)
class ContextStats:
    """Сумарна статистика одного контексту на певному порядку.

    ``total`` is the sum of adjusted counts of the context's continuations;
    ``n1``/``n2``/``n3plus`` count continuation types whose adjusted count is
    1, 2 and at least 3.
    """

    total: int
    n1: int
    n2: int
    n3plus: int


@dataclass
class CountTable:
    """Сирі лічильники n-грам для порядків 1..order.

    ``counts[k - 1]`` maps k-tuples of token ids to raw occurrence counts.
    Continuation counts, counts-of-counts and per-context statistics are
    derived on demand, so merging only has to add the raw maps.
    """

    order: int
    counts: list[Counter[Ngram]] = field(default_factory=list)

    def __post_init__(self) -> None:
        validate_order(self.order)
        if not self.counts:
            self.counts = [Counter() for _ in range(self.order)]
        elif len(self.counts) != self.order:
            raise ValueError("Кількість таблиць не відповідає порядку")

    def add_sentence(self, ids: Sequence[int], eos_id: int) -> None:
        """Додає n-грами одного вже закодованого речення."""

        offset = self.order - 1
        padded = [BOS_ID] * offset + list(ids) + [eos_id]
        for k in range(1, self.order + 1):
            start = offset - k + 1
            self.counts[k - 1].update(zip(*(padded[start + j :] for j in range(k))))

    def merge(self, other: CountTable) -> CountTable:
        """Повертає поточкову суму двох таблиць (комутативна й асоціативна).

        Return the pointwise sum of two tables; neither operand is modified.
        """

        if other.order != self.order:
            raise ValueError("Неможливо об'єднати таблиці різних порядків")
        merged: list[Counter[Ngram]] = []
        for mine, theirs in zip(self.counts, other.counts):
            combined = mine.copy()
            combined.update(theirs)
            merged.append(combined)
        return CountTable(order=self.order, counts=merged)

    def count(self, ngram: Ngram) -> int:
        if not 1 <= len(ngram) <= self.order:
            return 0
        return self.counts[len(ngram) - 1].get(ngram, 0)

    def continuation_counts(self, k: int) -> Counter[Ngram]:
        """N1+(·g): кількість різних лівих продовжень кожної k-грами, k < order.

        Number of distinct left extensions of every k-gram, read off the
        (k + 1)-gram table.
        """

        if not 1 <= k < self.order:
            raise ValueError("Лічильники продовжень визначені лише для k < order")
        continuation: Counter[Ngram] = Counter()
        continuation.update(ngram[1:] for ngram in self.counts[k])
        return continuation

    def adjusted_counts(self, k: int) -> dict[Ngram, int]:
        """Лічильники, на яких оцінюється розподіл порядку k.

        Raw counts at the top order and for k-grams starting with ``<s>``;
        continuation counts everywhere else.
        """

        raw = self.counts[k - 1]
        if k == self.order:
            return dict(raw)
        continuation = self.continuation_counts(k)
        return {
            ngram: (count if ngram[0] == BOS_ID else continuation[ngram])
            for ngram, count in raw.items()
        }

    def counts_of_counts(self, k: int) -> tuple[int, int, int, int]:
        """(n1, n2, n3, n4) для скоригованих лічильників порядку k."""

        return counts_of_counts(self.adjusted_counts(k).values())

    def context_stats(self, k: int) -> dict[Ngram, ContextStats]:
        """Статистика N1/N2/N3+ і сума для кожного контексту порядку k."""

        return context_stats(self.adjusted_counts(k))

    def total_ngrams(self, k: int) -> int:
        return len(self.counts[k - 1])


def counts_of_counts(values: Iterable[int]) -> tuple[int, int, int, int]:
    histogram = Counter(value for value in values if value <= 4)
    return histogram[1], histogram[2], histogram[3], histogram[4]


def context_stats(adjusted: dict[Ngram, int]) -> dict[Ngram, ContextStats]:
    totals: dict[Ngram, list[int]] = {}
    for ngram, value in adjusted.items():
        entry = totals.get(ngram[:-1])
        if entry is None:
            entry = totals[ngram[:-1]] = [0, 0, 0, 0]
        entry[0] += value
        if value == 1:
            entry[1] += 1
        elif value == 2:
            entry[2] += 1
        else:
            entry[3] += 1
    return {context: ContextStats(*values) for context, values in totals.items()}


def _count_shard(
    sentences: Sequence[Sequence[str]], vocab: Vocabulary, order: int
) -> CountTable:
    table = CountTable(order=order)
    eos_id = vocab.eos_id
    for sentence in sentences:
        table.add_sentence(vocab.encode(sentence), eos_id)
    return table


def _shard(items: Sequence[Sequence[str]], parts: int) -> list[Sequence[Sequence[str]]]:
    size = max(1, -(-len(items) // parts))
    return [items[start : start + size] for start in range(0, len(items), size)]


def count_ngrams(
    sentences: Sequence[Sequence[str]],
    vocab: Vocabulary,
    order: int,
    *,
    workers: int = 1,
) -> CountTable:
    """Рахує всі k-грами (k = 1..order) корпусу.

    Count every k-gram of the corpus for k = 1..order. Out-of-vocabulary tokens
    read as ``<unk>``. With ``workers > 1`` the corpus is split into contiguous
    shards counted in a thread pool and merged in shard order; the merge is a
    pointwise sum, so the result does not depend on ``workers``.
    """

    validate_order(order)
    if workers < 1:
        raise ValueError("Кількість потоків має бути не меншою за 1")
    sentences = list(sentences)
    if workers == 1 or len(sentences) < 2:
        table = _count_shard(sentences, vocab, order)
    else:
        shards = _shard(sentences, workers)
        table = CountTable(order=order)
        with ThreadPoolExecutor(max_workers=min(workers, len(shards))) as pool:
            for partial in pool.map(lambda shard: _count_shard(shard, vocab, order), shards):
                table = table.merge(partial)
    logger.info(
        "Пораховано n-грами: %s",
        ", ".join(f"{k}={table.total_ngrams(k)}" for k in range(1, order + 1)),
    )
    return table
