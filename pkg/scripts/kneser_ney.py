"""Модифіковане згладжування Кнезера–Нея з трьома знижками.

Interpolated modified Kneser-Ney estimation, stored in backoff form.

Для контексту h порядку k:

    p_k(w | h) = max(a(hw) - D(a(hw)), 0) / A(h) + γ(h) · p_{k-1}(w | h[1:])
    γ(h)       = (D1·N1(h·) + D2·N2(h·) + D3+·N3+(h·)) / A(h)

де a позначає скориговані лічильники (див. :meth:`CountTable.adjusted_counts`),
A(h) їхню суму по продовженнях h, а p_0 рівномірний розподіл на всіх
словах, крім ``<s>``. Для збереженої n-грами зберігається повне
інтерпольоване значення, а γ(h) стає ваговим коефіцієнтом відкату контексту,
тож відкат відтворює інтерпольовану формулу точно.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

try:  # pragma: no cover
    from .backoff_model import LOG10_ZERO, BackoffModel
    from .corpus import Vocabulary
    from .ngram_counts import BOS_ID, CountTable, Ngram, context_stats
    from .utils import HumorLMError
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.backoff_model import LOG10_ZERO, BackoffModel
    from scripts.corpus import Vocabulary
    from scripts.ngram_counts import BOS_ID, CountTable, Ngram, context_stats
    from scripts.utils import HumorLMError

logger = logging.getLogger(__name__)

FALLBACK_DISCOUNTS = (0.5, 1.0, 1.5)


class EmptyCorpus(HumorLMError):
    """Корпус не містить жодної n-грами найвищого порядку."""

    def __init__(self) -> None:
        super().__init__("Корпус порожній: немає n-грам найвищого порядку")


@dataclass(frozen=True)
class OrderDiscounts:
    """Знижки D1, D2, D3+ одного порядку."""

    d1: float
    d2: float
    d3plus: float

    def for_count(self, count: int) -> float:
        if count <= 0:
            return 0.0
        if count == 1:
            return self.d1
        if count == 2:
            return self.d2
        return self.d3plus

    def as_tuple(self) -> tuple[float, float, float]:
        return self.d1, self.d2, self.d3plus


@dataclass(frozen=True)
class Discounts:
    """Знижки для кожного порядку 1..N; ``discounts[k]`` повертає порядок k."""

    by_order: tuple[OrderDiscounts, ...]

    def __getitem__(self, k: int) -> OrderDiscounts:
        if not 1 <= k <= len(self.by_order):
            raise IndexError(f"Немає знижок для порядку {k}")
        return self.by_order[k - 1]

    def __len__(self) -> int:
        return len(self.by_order)


def _clamp(value: float, ceiling: float) -> float:
    return min(max(value, 0.0), ceiling)


def estimate_order_discounts(n1: int, n2: int, n3: int, n4: int) -> OrderDiscounts:
    """Оцінює знижки одного порядку за лічильниками лічильників.

    Closed-form estimates with Y = n1 / (n1 + 2·n2). Degenerate inputs fall
    back to (0.5, 1.0, 1.5); with n3 = 0, D3+ becomes D2 + 0.5; a value that
    comes out non-positive takes its fallback default. Every Dk is clamped to
    [0, k].
    """

    if n1 <= 0 or n2 <= 0:
        return OrderDiscounts(*FALLBACK_DISCOUNTS)
    y = n1 / (n1 + 2 * n2)
    d1 = 1 - 2 * y * n2 / n1
    d2 = 2 - 3 * y * n3 / n2
    d3plus = 3 - 4 * y * n4 / n3 if n3 > 0 else d2 + 0.5
    values = []
    for ceiling, (value, fallback) in enumerate(zip((d1, d2, d3plus), FALLBACK_DISCOUNTS), start=1):
        if value <= 0:
            logger.debug("Знижка D%d=%.4f непозитивна, використано %.1f", ceiling, value, fallback)
            value = fallback
        values.append(_clamp(value, float(ceiling)))
    return OrderDiscounts(*values)


def estimate_discounts(counts_of_counts: Sequence[tuple[int, int, int, int]]) -> Discounts:
    """Оцінює знижки для кожного порядку (індекс 0 відповідає уніграмам).

    Estimate discounts for every order from its (n1, n2, n3, n4).
    """

    return Discounts(tuple(estimate_order_discounts(*item) for item in counts_of_counts))


def discounts_for(counts: CountTable) -> Discounts:
    """Знижки, оцінені за скоригованими лічильниками таблиці."""

    return estimate_discounts([counts.counts_of_counts(k) for k in range(1, counts.order + 1)])


def _interpolate(
    adjusted: dict[Ngram, int],
    order_discounts: OrderDiscounts,
    lower: dict[Ngram, float],
) -> tuple[dict[Ngram, float], dict[Ngram, float]]:
    stats = context_stats(adjusted)
    gammas: dict[Ngram, float] = {}
    for context, item in stats.items():
        mass = (
            order_discounts.d1 * item.n1
            + order_discounts.d2 * item.n2
            + order_discounts.d3plus * item.n3plus
        )
        gammas[context] = mass / item.total
    probs: dict[Ngram, float] = {}
    for ngram, value in adjusted.items():
        context = ngram[:-1]
        discounted = max(value - order_discounts.for_count(value), 0.0) / stats[context].total
        probs[ngram] = discounted + gammas[context] * lower[ngram[1:]]
    return probs, gammas


def train(
    counts: CountTable,
    discounts: Discounts,
    vocab: Vocabulary,
    order: int,
) -> BackoffModel:
    """Будує модель відкату порядку ``order`` з інтерпольованих оцінок.

    Build an order-N backoff model from interpolated modified Kneser-Ney
    estimates. Every vocabulary entry except ``<s>`` receives a unigram
    probability through the uniform floor.
    """

    if counts.order != order:
        raise ValueError(f"Таблицю пораховано для порядку {counts.order}, а не {order}")
    if len(discounts) < order:
        raise ValueError("Знижок менше, ніж порядків моделі")
    if not counts.counts[order - 1]:
        raise EmptyCorpus()

    predictable = len(vocab) - 1
    uniform = 1.0 / predictable

    adjusted = counts.adjusted_counts(1)
    unigram_stats = context_stats(adjusted).get(())
    unigram_discounts = discounts[1]
    if unigram_stats is None:
        raise EmptyCorpus()
    gamma = (
        unigram_discounts.d1 * unigram_stats.n1
        + unigram_discounts.d2 * unigram_stats.n2
        + unigram_discounts.d3plus * unigram_stats.n3plus
    ) / unigram_stats.total
    lower: dict[Ngram, float] = {}
    for token_id in range(len(vocab)):
        if token_id == BOS_ID:
            continue
        value = adjusted.get((token_id,), 0)
        discounted = max(value - unigram_discounts.for_count(value), 0.0) / unigram_stats.total
        lower[(token_id,)] = discounted + gamma * uniform

    log_probs: list[dict[Ngram, float]] = [
        {ngram: math.log10(value) for ngram, value in lower.items()}
    ]
    log_probs[0][(BOS_ID,)] = LOG10_ZERO
    log_backoffs: dict[Ngram, float] = {}

    for k in range(2, order + 1):
        probs, gammas = _interpolate(counts.adjusted_counts(k), discounts[k], lower)
        for context, weight in gammas.items():
            log_backoffs[context] = math.log10(weight)
            # pure <s> contexts have no probability of their own
            if context not in log_probs[k - 2]:
                log_probs[k - 2][context] = LOG10_ZERO
        log_probs.append({ngram: math.log10(value) for ngram, value in probs.items()})
        lower = probs

    logger.info(
        "Модель порядку %d: %s",
        order,
        ", ".join(f"{k}={len(table)}" for k, table in enumerate(log_probs, start=1)),
    )
    return BackoffModel(order=order, vocab=vocab, log_probs=log_probs, log_backoffs=log_backoffs)
