"""Спільні допоміжні функції: декодування тексту, JSON-звіти та базовий виняток.

Shared helpers: text decoding, JSON reports and the package-wide error base.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable, Iterator

logger = logging.getLogger(__name__)


class HumorLMError(RuntimeError):
    """Базовий виняток для всіх помилок пакета.

    Base class for every error raised by the package.
    """


def decode_text(raw: bytes | str) -> str:
    """Декодує байти як UTF-8, замінюючи некоректні послідовності.

    Decode bytes as UTF-8, substituting U+FFFD for invalid sequences.
    """

    if isinstance(raw, str):
        return raw
    return raw.decode("utf-8", errors="replace")


def strip_newline(line: str) -> str:
    """Прибирає завершальний LF (і CR перед ним), не чіпаючи інших пробілів.

    Remove a trailing LF (and a CR before it) without touching other whitespace.
    """

    if line.endswith("\n"):
        line = line[:-1]
    if line.endswith("\r"):
        line = line[:-1]
    return line


def iter_decoded_lines(lines: Iterable[bytes | str]) -> Iterator[tuple[int, str]]:
    """Повертає пари (номер рядка від 1, декодований рядок без переводу рядка)."""

    for number, raw in enumerate(lines, start=1):
        yield number, strip_newline(decode_text(raw))


def expand_paths(paths: Iterable[Path], *, suffix: str | None = None) -> list[Path]:
    """Розгортає каталоги у відсортований перелік файлів.

    Expand directories into a sorted list of files, keeping explicit files as-is.
    """

    result: list[Path] = []
    for path in paths:
        if path.is_dir():
            pattern = f"*{suffix}" if suffix else "*"
            result.extend(sorted(item for item in path.glob(pattern) if item.is_file()))
        else:
            result.append(path)
    return result


def dump_json(data: Any) -> str:
    """Повертає відформатований JSON-рядок зі стабільним порядком ключів."""

    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True)


def write_json(path: Path, data: Any) -> None:
    """Зберігає JSON-документ, створюючи батьківські каталоги.

    Persist a JSON document, creating parent directories when needed.
    """

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_json(data) + "\n", encoding="utf-8")


def load_json_or_default(path: Path, default: Any) -> Any:
    """Завантажує JSON або повертає значення за замовчуванням.

    Load JSON from ``path`` or return ``default`` for missing or empty files.
    """

    if not path.exists():
        return default
    text = decode_text(path.read_bytes()).strip()
    if not text:
        return default
    return json.loads(text)
