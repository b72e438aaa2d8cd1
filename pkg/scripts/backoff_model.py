"""Модель відкату: запити ймовірностей, оцінка речень і перплексія.

Backoff model: probability queries, sentence scoring and perplexity.

Модель незмінна після побудови і безпечна для довільної кількості
паралельних читачів: запити нічого не записують у спільний стан.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

try:  # pragma: no cover
    from .corpus import UnknownId, Vocabulary
    from .ngram_counts import BOS_ID, Ngram
    from .utils import HumorLMError
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.corpus import UnknownId, Vocabulary
    from scripts.ngram_counts import BOS_ID, Ngram
    from scripts.utils import HumorLMError

logger = logging.getLogger(__name__)

LOG10_ZERO = -99.0


class EmptyInput(HumorLMError):
    """Немає жодної позиції для оцінювання."""

    def __init__(self, what: str = "вхід") -> None:
        super().__init__(f"Порожній {what}: немає позицій для оцінювання")


class SentenceScore(NamedTuple):
    """Сумарний log10 ймовірності речення та кількість оцінених позицій."""

    log10_prob: float
    token_count: int


@dataclass(frozen=True, eq=False)
class BackoffModel:
    """Модель відкату порядку N над фіксованим словником.

    ``log_probs[k - 1]`` maps stored k-grams (tuples of token ids) to their
    log10 probability; ``log_backoffs`` maps contexts to their log10 backoff
    weight. A context that is not stored backs off with weight 1.
    """

    order: int
    vocab: Vocabulary
    log_probs: list[dict[Ngram, float]]
    log_backoffs: dict[Ngram, float]

    def __post_init__(self) -> None:
        if len(self.log_probs) != self.order:
            raise ValueError("Кількість таблиць ймовірностей не відповідає порядку моделі")

    def entry_count(self, k: int) -> int:
        return len(self.log_probs[k - 1])

    def log10_backoff(self, context: Sequence[int]) -> float:
        return self.log_backoffs.get(tuple(context), 0.0)

    def log10_prob(self, word: int, context: Sequence[int] = ()) -> float:
        """log10 P(word | context) з рекурсивним відкатом.

        Contexts longer than N − 1 are cut down to their last N − 1 ids.
        """

        size = len(self.vocab.token_of)
        if not 0 <= word < size:
            raise UnknownId(word)
        if word == BOS_ID:
            raise ValueError("<s> не може бути прогнозованим словом")
        for token_id in context:
            if not 0 <= token_id < size:
                raise UnknownId(token_id)
        history = tuple(context)
        if len(history) >= self.order:
            history = history[len(history) - self.order + 1 :]
        return self._log10_prob(word, history)

    def _log10_prob(self, word: int, history: Ngram) -> float:
        log_probs = self.log_probs
        log_backoffs = self.log_backoffs
        weight = 0.0
        while True:
            value = log_probs[len(history)].get(history + (word,))
            if value is not None:
                return weight + value
            if not history:
                raise UnknownId(word)
            weight += log_backoffs.get(history, 0.0)
            history = history[1:]

    def prob(self, word: int, context: Sequence[int] = ()) -> float:
        return 10.0 ** self.log10_prob(word, context)

    def distribution(self, context: Sequence[int] = ()) -> np.ndarray:
        """Повний розподіл наступного слова за ідентифікаторами словника.

        Full next-word distribution indexed by token id; the ``<s>`` entry is 0.
        """

        result = np.zeros(len(self.vocab), dtype=np.float64)
        for token_id in range(len(self.vocab)):
            if token_id != BOS_ID:
                result[token_id] = self.prob(token_id, context)
        return result


def prob(model: BackoffModel, word: int, context: Sequence[int] = ()) -> float:
    """P(word | context) для ідентифікаторів словника моделі."""

    return model.prob(word, context)


def sentence_logprob(
    model: BackoffModel, tokens: Sequence[str], *, allow_empty: bool = True
) -> SentenceScore:
    """Сумарний log10 ймовірності речення з ``<s>``×(N−1) та ``</s>``.

    Every real token and the closing ``</s>`` are scored, so ``token_count``
    is ``len(tokens) + 1``. Out-of-vocabulary tokens read as ``<unk>``. An
    empty sentence scores as P(``</s>`` | ``<s>``…) unless ``allow_empty`` is
    false, in which case :class:`EmptyInput` is raised.
    """

    if not tokens and not allow_empty:
        raise EmptyInput("твіт")
    vocab = model.vocab
    width = model.order - 1
    history = [BOS_ID] * width + vocab.encode(tokens) + [vocab.eos_id]
    total = 0.0
    for position in range(width, len(history)):
        total += model._log10_prob(history[position], tuple(history[position - width : position]))
    return SentenceScore(total, len(history) - width)


def corpus_logprob(
    model: BackoffModel, sentences: Iterable[Sequence[str]]
) -> tuple[float, int, int]:
    """Повертає (сумарний log10, кількість позицій, кількість речень)."""

    total = 0.0
    positions = 0
    count = 0
    for sentence in sentences:
        score = sentence_logprob(model, sentence)
        total += score.log10_prob
        positions += score.token_count
        count += 1
    return total, positions, count


def perplexity(model: BackoffModel, sentences: Iterable[Sequence[str]]) -> float:
    """Перплексія 10^(−Σlog10 / позиції) на наборі речень.

    Perplexity over every scored position (tokens plus ``</s>``).
    """

    total, positions, count = corpus_logprob(model, sentences)
    if positions == 0:
        raise EmptyInput("корпус")
    logger.debug("Перплексія: %d речень, %d позицій", count, positions)
    return math.pow(10.0, -total / positions)
