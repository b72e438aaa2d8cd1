"""Підготовка корпусів: токенізація, читання новин і твітів, словник.

Corpus preparation: tokenization, news and tweet ingestion, vocabulary.

Новини читаються як звичайний текст (одне речення на рядок), твіти читаються
з TSV-файлів ``<hashtag>.tsv`` з полями ``tweet_id<TAB>text[<TAB>label]``.
Усі токени приводяться до нижнього регістру; службові токени ``<s>``,
``</s>`` та ``<unk>`` ніколи не з'являються у виході токенізатора.

News is read as plain text (one sentence per line), tweets as
``<hashtag>.tsv`` files with ``tweet_id<TAB>text[<TAB>label]`` fields.
"""
from __future__ import annotations

import logging
import string
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence

try:  # pragma: no cover
    from .utils import HumorLMError, decode_text, iter_decoded_lines, strip_newline
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.utils import HumorLMError, decode_text, iter_decoded_lines, strip_newline

logger = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIAL_TOKENS = (UNK, BOS, EOS)
DEFAULT_MIN_COUNT = 1

_PUNCTUATION = frozenset(string.punctuation)
_SIGILS = frozenset("@#")

LineSource = Path | str | Iterable[bytes | str]


class IngestError(HumorLMError):
    """Помилка читання корпусу із зазначенням місця збою.

    Raised when a corpus cannot be read; ``line_number`` and ``byte_offset``
    point at the position reached before the failure.
    """

    def __init__(self, source: str, line_number: int, byte_offset: int) -> None:
        super().__init__(
            f"Не вдалося прочитати {source}: рядок {line_number}, зсув {byte_offset} байт"
        )
        self.source = source
        self.line_number = line_number
        self.byte_offset = byte_offset


class MalformedRecord(HumorLMError):
    """Некоректний рядок TSV-файла з твітами."""

    def __init__(self, line_number: int, reason: str) -> None:
        super().__init__(f"Рядок {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class DuplicateId(HumorLMError):
    """Повторний tweet_id у межах одного хештегу."""

    def __init__(self, tweet_id: str, line_number: int) -> None:
        super().__init__(f"Рядок {line_number}: повторний tweet_id '{tweet_id}'")
        self.tweet_id = tweet_id
        self.line_number = line_number


class InvalidGoldLabels(HumorLMError):
    """Еталонні мітки хештегу не утворюють коректного поділу 1/9/решта."""

    def __init__(self, hashtag: str, reason: str) -> None:
        super().__init__(f"Хештег '{hashtag}': {reason}")
        self.hashtag = hashtag
        self.reason = reason


class UnknownId(HumorLMError):
    """Ідентифікатор токена поза межами словника."""

    def __init__(self, token_id: int) -> None:
        super().__init__(f"Невідомий ідентифікатор токена: {token_id}")
        self.token_id = token_id


class Label(IntEnum):
    """Еталонна категорія твіту в межах хештегу.

    Gold bucket of a tweet within its hashtag.
    """

    REST = 0
    NEXT9 = 1
    TOP1 = 2


def tokenize(text: bytes | str) -> list[str]:
    """Розбиває сирий текст на токени в нижньому регістрі.

    Split raw text into lowercased tokens. Leading and trailing ASCII
    punctuation becomes standalone single-character tokens; the ``@``/``#``
    sigil of a mention or hashtag stays attached, and any chunk containing
    ``://`` is kept whole.
    """

    tokens: list[str] = []
    for chunk in decode_text(text).lower().split():
        if chunk.isalnum():
            tokens.append(chunk)
        else:
            _split_chunk(chunk, tokens)
    return tokens


def _split_chunk(chunk: str, out: list[str]) -> None:
    if "://" in chunk:
        out.append(chunk)
        return
    start, end = 0, len(chunk)
    while start < end and chunk[start] in _PUNCTUATION:
        if chunk[start] in _SIGILS and start + 1 < end and chunk[start + 1] not in _PUNCTUATION:
            break
        out.append(chunk[start])
        start += 1
    trailing: list[str] = []
    while end > start and chunk[end - 1] in _PUNCTUATION:
        end -= 1
        trailing.append(chunk[end])
    if start < end:
        out.append(chunk[start:end])
    out.extend(reversed(trailing))


def _iter_source_lines(source: LineSource) -> Iterator[tuple[int, str]]:
    """Ітерує рядки з файла або з готового потоку рядків.

    Iterate ``(line_number, text)`` pairs from a path or from any iterable of
    lines. Read failures on a path are reported as :class:`IngestError`.
    """

    if not isinstance(source, (str, Path)):
        yield from iter_decoded_lines(source)
        return

    path = Path(source)
    line_number = 0
    byte_offset = 0
    try:
        with path.open("rb") as handle:
            for raw in handle:
                line_number += 1
                yield line_number, strip_newline(decode_text(raw))
                byte_offset += len(raw)
    except OSError as exc:
        raise IngestError(str(path), line_number + 1, byte_offset) from exc


def iter_plaintext(source: LineSource) -> Iterator[list[str]]:
    """Лінива версія :func:`ingest_plaintext`."""

    for _, line in _iter_source_lines(source):
        if line.strip():
            yield tokenize(line)


def ingest_plaintext(source: LineSource) -> list[list[str]]:
    """Читає новинний корпус: одне речення на рядок, порожні рядки пропускаються.

    Read a plain-text corpus, one tokenized sentence per non-blank line.
    """

    return list(iter_plaintext(source))


@dataclass(frozen=True)
class TweetRecord:
    """Твіт, надісланий у відповідь на хештег.

    A tweet submitted for a hashtag prompt, with an optional gold label.
    """

    tweet_id: str
    text: str
    gold: Label | None = None

    def __post_init__(self) -> None:
        if not self.tweet_id:
            raise ValueError("tweet_id не може бути порожнім")
        if self.gold is not None and not isinstance(self.gold, Label):
            object.__setattr__(self, "gold", Label(self.gold))


@dataclass(frozen=True)
class HashtagSet:
    """Усі твіти, що відповідають одному хештегу, у порядку файла.

    All tweets answering one hashtag prompt, in file order.
    """

    hashtag: str
    tweets: tuple[TweetRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tweets", tuple(self.tweets))
        seen: set[str] = set()
        for position, record in enumerate(self.tweets, start=1):
            if record.tweet_id in seen:
                raise DuplicateId(record.tweet_id, position)
            seen.add(record.tweet_id)

    def __len__(self) -> int:
        return len(self.tweets)

    def ids(self) -> list[str]:
        return [record.tweet_id for record in self.tweets]

    @property
    def has_gold(self) -> bool:
        """Чи має кожен твіт еталонну мітку."""

        return bool(self.tweets) and all(record.gold is not None for record in self.tweets)

    def gold_labels(self) -> dict[str, Label]:
        """Повертає відображення tweet_id → еталонна мітка (лише для мічених)."""

        return {
            record.tweet_id: record.gold for record in self.tweets if record.gold is not None
        }

    def validate_gold(self) -> None:
        """Перевіряє, що мітки утворюють поділ: один Top1, min(9, n−1) Next9.

        Check the gold invariant: every tweet labelled, exactly one Top1 and
        exactly ``min(9, n - 1)`` Next9 tweets.
        """

        if not self.has_gold:
            raise InvalidGoldLabels(self.hashtag, "не всі твіти мають еталонні мітки")
        counts = Counter(record.gold for record in self.tweets)
        if counts[Label.TOP1] != 1:
            raise InvalidGoldLabels(
                self.hashtag, f"очікувався один Top1, знайдено {counts[Label.TOP1]}"
            )
        expected_next = min(9, len(self.tweets) - 1)
        if counts[Label.NEXT9] != expected_next:
            raise InvalidGoldLabels(
                self.hashtag,
                f"очікувалось {expected_next} Next9, знайдено {counts[Label.NEXT9]}",
            )


def _parse_label(raw: str, line_number: int) -> Label:
    value = raw.strip()
    if value not in {"0", "1", "2"}:
        raise MalformedRecord(line_number, f"мітка '{raw}' не входить до {{0,1,2}}")
    return Label(int(value))


def ingest_tweet_tsv(source: LineSource, *, hashtag: str | None = None) -> HashtagSet:
    """Читає TSV-файл хештегу у порядку рядків.

    Read a hashtag TSV file preserving file order. The hashtag name comes from
    ``hashtag`` or, for a path, from the file name stem.
    """

    if hashtag is None:
        hashtag = Path(source).stem if isinstance(source, (str, Path)) else ""

    records: list[TweetRecord] = []
    seen: set[str] = set()
    for line_number, line in _iter_source_lines(source):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise MalformedRecord(
                line_number, f"очікувалось 2 або 3 поля через TAB, знайдено {len(fields)}"
            )
        tweet_id = fields[0].strip()
        if not tweet_id:
            raise MalformedRecord(line_number, "порожній tweet_id")
        if tweet_id in seen:
            raise DuplicateId(tweet_id, line_number)
        seen.add(tweet_id)
        gold = _parse_label(fields[2], line_number) if len(fields) == 3 else None
        records.append(TweetRecord(tweet_id=tweet_id, text=fields[1], gold=gold))
    logger.debug("Хештег %s: прочитано %d твітів", hashtag, len(records))
    return HashtagSet(hashtag=hashtag, tweets=tuple(records))


def write_tweet_tsv(hashtag_set: HashtagSet, sink: IO[str] | Path) -> None:
    """Серіалізує набір твітів у TSV (обернена до :func:`ingest_tweet_tsv`).

    Serialize a HashtagSet as TSV, the inverse of :func:`ingest_tweet_tsv`.
    """

    lines: list[str] = []
    for record in hashtag_set.tweets:
        if "\t" in record.text or "\n" in record.text or "\r" in record.text:
            raise ValueError(f"Текст твіту {record.tweet_id} містить TAB або перевід рядка")
        fields = [record.tweet_id, record.text]
        if record.gold is not None:
            fields.append(str(int(record.gold)))
        lines.append("\t".join(fields))
    content = "".join(line + "\n" for line in lines)
    if isinstance(sink, Path):
        sink.write_text(content, encoding="utf-8")
    else:
        sink.write(content)


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Інтернована таблиця токен ↔ щільний цілочисловий ідентифікатор.

    Interned token ↔ dense integer id table. The special tokens always occupy
    ids 0, 1 and 2 (``<unk>``, ``<s>``, ``</s>``).
    """

    token_of: tuple[str, ...]
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.token_of[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
            raise ValueError("Службові токени мають займати ідентифікатори 0, 1, 2")
        id_of = {token: index for index, token in enumerate(self.token_of)}
        if len(id_of) != len(self.token_of):
            raise ValueError("Словник містить повторні токени")
        object.__setattr__(self, "id_of", id_of)

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> Vocabulary:
        """Будує словник зі службовими токенами попереду та без повторів."""

        ordered = list(SPECIAL_TOKENS)
        seen = set(ordered)
        for token in tokens:
            if token not in seen:
                seen.add(token)
                ordered.append(token)
        return cls(tuple(ordered))

    @property
    def unk_id(self) -> int:
        return 0

    @property
    def bos_id(self) -> int:
        return 1

    @property
    def eos_id(self) -> int:
        return 2

    def __len__(self) -> int:
        return len(self.token_of)

    def __contains__(self, token: object) -> bool:
        return token in self.id_of

    def __iter__(self) -> Iterator[str]:
        return iter(self.token_of)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.token_of == other.token_of

    def __hash__(self) -> int:
        return hash(self.token_of)

    def lookup(self, token: str) -> int:
        """Повертає ідентифікатор токена або ідентифікатор ``<unk>``."""

        return self.id_of.get(token, 0)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        id_of = self.id_of
        return [id_of.get(token, 0) for token in tokens]

    def token(self, token_id: int) -> str:
        """Повертає токен за ідентифікатором або піднімає :class:`UnknownId`."""

        self.check_id(token_id)
        return self.token_of[token_id]

    def check_id(self, token_id: int) -> None:
        if not 0 <= token_id < len(self.token_of):
            raise UnknownId(token_id)


def build_vocabulary(
    sentences: Iterable[Sequence[str]], min_count: int = DEFAULT_MIN_COUNT
) -> Vocabulary:
    """Будує словник із токенів із частотою не нижче ``min_count``.

    Build a vocabulary of every token with corpus frequency ≥ ``min_count``
    plus the special tokens. Ids after the specials follow descending
    frequency, ties broken by the token string, so the table is deterministic.
    """

    if min_count < 1:
        raise ValueError("min_count має бути не меншим за 1")
    frequencies: Counter[str] = Counter()
    for sentence in sentences:
        frequencies.update(sentence)
    for special in SPECIAL_TOKENS:
        frequencies.pop(special, None)
    kept = sorted(
        (token for token, count in frequencies.items() if count >= min_count),
        key=lambda token: (-frequencies[token], token),
    )
    dropped = len(frequencies) - len(kept)
    if dropped:
        logger.info("До <unk> відображено %d рідкісних типів (min_count=%d)", dropped, min_count)
    return Vocabulary.from_tokens(kept)
