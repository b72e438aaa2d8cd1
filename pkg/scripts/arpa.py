r"""Читання та запис моделей у форматі ARPA.

Read and write backoff models in the ARPA text format::

    \data\
    ngram 1=<count>
    ...

    \1-grams:
    <log10prob>\t<w1>[\t<log10backoff>]
    ...

    \end\

Ймовірності друкуються з шістьма знаками після коми; вага відкату
пропускається для найвищого порядку та для записів без збереженої ваги.
"""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import IO, Iterable, Iterator

try:  # pragma: no cover
    from .backoff_model import BackoffModel
    from .corpus import BOS, EOS, UNK, Vocabulary
    from .ngram_counts import MAX_ORDER, Ngram
    from .utils import HumorLMError, iter_decoded_lines
except ImportError:  # pragma: no cover
    import sys

    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.backoff_model import BackoffModel
    from scripts.corpus import BOS, EOS, UNK, Vocabulary
    from scripts.ngram_counts import MAX_ORDER, Ngram
    from scripts.utils import HumorLMError, iter_decoded_lines

logger = logging.getLogger(__name__)

MISSING_UNK_LOG10 = -100.0
_COUNT_RE = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION_RE = re.compile(r"^\\(\d+)-grams:$")


class ArpaParseError(HumorLMError):
    """Некоректний ARPA-файл; ``line_number`` вказує на проблемний рядок."""

    def __init__(self, line_number: int, reason: str) -> None:
        super().__init__(f"ARPA, рядок {line_number}: {reason}")
        self.line_number = line_number
        self.reason = reason


class ArpaCountMismatch(HumorLMError):
    """Кількість записів секції не збігається із заголовком ``\\data\\``."""

    def __init__(self, order: int, declared: int, found: int) -> None:
        super().__init__(
            f"ARPA: заголовок оголошує {declared} {order}-грам, у секції знайдено {found}"
        )
        self.order = order
        self.declared = declared
        self.found = found


def _format_entry(model: BackoffModel, ngram: Ngram, log_prob: float, *, top: bool) -> str:
    words = " ".join(model.vocab.token_of[token_id] for token_id in ngram)
    line = f"{log_prob:.6f}\t{words}"
    if not top:
        backoff = model.log_backoffs.get(ngram)
        if backoff is not None:
            line += f"\t{backoff:.6f}"
    return line


def iter_arpa_lines(model: BackoffModel) -> Iterator[str]:
    """Генерує рядки ARPA-файла у порядку ідентифікаторів."""

    yield "\\data\\"
    for k in range(1, model.order + 1):
        yield f"ngram {k}={model.entry_count(k)}"
    for k in range(1, model.order + 1):
        yield ""
        yield f"\\{k}-grams:"
        table = model.log_probs[k - 1]
        top = k == model.order
        for ngram in sorted(table):
            yield _format_entry(model, ngram, table[ngram], top=top)
    yield ""
    yield "\\end\\"


def write_arpa(model: BackoffModel, sink: IO[str] | Path) -> None:
    """Записує модель у форматі ARPA (UTF-8, LF).

    Write ``model`` to a text stream or a path.
    """

    if isinstance(sink, Path):
        with sink.open("w", encoding="utf-8", newline="\n") as handle:
            write_arpa(model, handle)
        return
    for line in iter_arpa_lines(model):
        sink.write(line + "\n")


class _Lines:
    """Курсор по рядках із номерами та пропуском порожніх."""

    def __init__(self, lines: Iterable[bytes | str]) -> None:
        self._iter = iter_decoded_lines(lines)
        self._pending: tuple[int, str] | None = None
        self.last_number = 0

    def next(self) -> tuple[int, str] | None:
        if self._pending is not None:
            item, self._pending = self._pending, None
            return item
        for number, line in self._iter:
            self.last_number = number
            return number, line.strip()
        return None

    def push_back(self, item: tuple[int, str]) -> None:
        self._pending = item

    def next_nonblank(self) -> tuple[int, str] | None:
        while True:
            item = self.next()
            if item is None or item[1]:
                return item


def _parse_float(raw: str, line_number: int) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ArpaParseError(line_number, f"некоректне число '{raw}'") from exc


def _read_header(lines: _Lines) -> dict[int, int]:
    while True:
        item = lines.next()
        if item is None:
            raise ArpaParseError(lines.last_number + 1, "не знайдено заголовок \\data\\")
        if item[1] == "\\data\\":
            break
    declared: dict[int, int] = {}
    while True:
        item = lines.next_nonblank()
        if item is None:
            raise ArpaParseError(lines.last_number + 1, "файл обривається в заголовку")
        number, line = item
        match = _COUNT_RE.match(line)
        if match is None:
            lines.push_back(item)
            break
        order, count = int(match.group(1)), int(match.group(2))
        if order != len(declared) + 1:
            raise ArpaParseError(number, f"очікувався рядок 'ngram {len(declared) + 1}=...'")
        declared[order] = count
    if not declared:
        raise ArpaParseError(lines.last_number, "заголовок не містить жодного рядка ngram")
    if len(declared) > MAX_ORDER:
        raise ArpaParseError(lines.last_number, f"порядок більший за {MAX_ORDER}")
    return declared


def _read_section(
    lines: _Lines, order: int, top: bool
) -> list[tuple[int, float, tuple[str, ...], float | None]]:
    item = lines.next_nonblank()
    if item is None:
        raise ArpaParseError(lines.last_number + 1, f"відсутня секція \\{order}-grams:")
    number, line = item
    match = _SECTION_RE.match(line)
    if match is None or int(match.group(1)) != order:
        raise ArpaParseError(number, f"очікувалась секція \\{order}-grams:")
    entries: list[tuple[int, float, tuple[str, ...], float | None]] = []
    while True:
        item = lines.next()
        if item is None:
            break
        number, line = item
        if not line:
            break
        if line.startswith("\\"):
            lines.push_back(item)
            break
        parts = line.split()
        if len(parts) == order + 1:
            backoff = None
        elif len(parts) == order + 2 and not top:
            backoff = _parse_float(parts[-1], number)
        else:
            raise ArpaParseError(number, f"неочікувана кількість полів для {order}-грами")
        entries.append((number, _parse_float(parts[0], number), tuple(parts[1 : order + 1]), backoff))
    return entries


def read_arpa(source: IO[str] | Path | Iterable[bytes | str]) -> BackoffModel:
    """Читає ARPA-модель із файла чи потоку рядків.

    Read an ARPA model. Structural problems raise :class:`ArpaParseError`
    with the offending line; a section whose entry count differs from the
    ``\\data\\`` header raises :class:`ArpaCountMismatch`.
    """

    if isinstance(source, Path):
        with source.open("rb") as handle:
            return read_arpa(handle)

    lines = _Lines(source)
    declared = _read_header(lines)
    order = len(declared)

    sections = []
    for k in range(1, order + 1):
        entries = _read_section(lines, k, top=k == order)
        if len(entries) != declared[k]:
            raise ArpaCountMismatch(k, declared[k], len(entries))
        sections.append(entries)

    item = lines.next_nonblank()
    if item is None or item[1] != "\\end\\":
        number = lines.last_number + 1 if item is None else item[0]
        raise ArpaParseError(number, "відсутній завершальний рядок \\end\\")

    unigram_tokens = [words[0] for _, _, words, _ in sections[0]]
    for required in (BOS, EOS):
        if required not in unigram_tokens:
            raise ArpaParseError(sections[0][0][0] if sections[0] else 1, f"немає уніграми {required}")
    vocab = Vocabulary.from_tokens(unigram_tokens)

    log_probs: list[dict[Ngram, float]] = []
    log_backoffs: dict[Ngram, float] = {}
    for k, entries in enumerate(sections, start=1):
        table: dict[Ngram, float] = {}
        for number, log_prob, words, backoff in entries:
            try:
                ngram = tuple(vocab.id_of[word] for word in words)
            except KeyError as exc:
                raise ArpaParseError(number, f"слово {exc.args[0]!r} відсутнє серед уніграм") from exc
            if ngram in table:
                raise ArpaParseError(number, "повторний запис n-грами")
            table[ngram] = log_prob
            if backoff is not None:
                log_backoffs[ngram] = backoff
        log_probs.append(table)

    if UNK not in unigram_tokens:
        logger.warning("ARPA-модель не містить <unk>; використано log10 = %.1f", MISSING_UNK_LOG10)
        log_probs[0][(vocab.unk_id,)] = MISSING_UNK_LOG10

    return BackoffModel(order=order, vocab=vocab, log_probs=log_probs, log_backoffs=log_backoffs)
