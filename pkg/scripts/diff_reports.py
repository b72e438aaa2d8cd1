"""Порівняння JSON-звітів оцінювання для історичного моніторингу.

Скрипт аналізує два файли формату `eval_report.json` і формує
диференційований звіт із ключовими показниками:

* зміна зведеної точності попарного порівняння (`delta_accuracy_a`);
* зміна середньої відстані розбиття (`delta_distance_b`);
* зміни по хештегах, присутніх в обох звітах;
* появу або зникнення хештегів.

Результат повертається у форматі JSON та може бути збережений у файл
для подальшого використання в CI або при порівнянні конфігурацій моделей.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

try:  # pragma: no cover
    from .utils import HumorLMError, dump_json, load_json_or_default, write_json
except ImportError:  # pragma: no cover
    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.utils import HumorLMError, dump_json, load_json_or_default, write_json

logger = logging.getLogger(__name__)

DEFAULT_HISTORY_LIMIT = 120


class ReportFormatError(HumorLMError):
    """Звіт не є об'єктом одного запуску оцінювання."""


def _load_report(path: Path) -> dict[str, Any]:
    """Зчитує JSON-звіт та повертає словник з даними."""

    try:
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ReportFormatError(f"Некоректний JSON у файлі {path}") from exc
    if not isinstance(data, dict):
        raise ReportFormatError(f"Звіт {path} має бути JSON-об'єктом")
    if "runs" in data:
        raise ReportFormatError(
            f"Звіт {path} містить кілька запусків; порівнюються лише звіти однієї моделі"
        )
    return data


def _extract_number(report: dict[str, Any], key: str) -> float:
    value = report.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ReportFormatError(f"Поле '{key}' має бути числом, отримано {type(value)!r}")
    return float(value)


def _per_hashtag(report: dict[str, Any]) -> dict[str, dict[str, Any]]:
    entries = report.get("per_hashtag", [])
    if entries is None:
        return {}
    if not isinstance(entries, list):
        raise ReportFormatError(f"Очікувався список у полі 'per_hashtag', отримано {type(entries)!r}")
    return {str(item.get("hashtag", "")): item for item in entries if isinstance(item, dict)}


def _delta(current: Any, previous: Any) -> float | None:
    if current is None or previous is None:
        return None
    return float(current) - float(previous)


def build_diff(previous: dict[str, Any], current: dict[str, Any]) -> dict[str, Any]:
    """Обчислює відмінності між двома звітами оцінювання.

    Compute the difference between two single-run evaluation reports.
    """

    previous_tags = _per_hashtag(previous)
    current_tags = _per_hashtag(current)
    shared = sorted(previous_tags.keys() & current_tags.keys())

    return {
        "previous_model": previous.get("model"),
        "current_model": current.get("model"),
        "delta_accuracy_a": _extract_number(current, "accuracy_a")
        - _extract_number(previous, "accuracy_a"),
        "delta_distance_b": _extract_number(current, "distance_b")
        - _extract_number(previous, "distance_b"),
        "delta_pair_count": int(_extract_number(current, "pair_count"))
        - int(_extract_number(previous, "pair_count")),
        "per_hashtag": {
            tag: {
                "delta_accuracy_a": _delta(
                    current_tags[tag].get("accuracy_a"), previous_tags[tag].get("accuracy_a")
                ),
                "delta_distance_b": _delta(
                    current_tags[tag].get("distance_b"), previous_tags[tag].get("distance_b")
                ),
            }
            for tag in shared
        },
        "added_hashtags": sorted(current_tags.keys() - previous_tags.keys()),
        "removed_hashtags": sorted(previous_tags.keys() - current_tags.keys()),
    }


def _prepare_history_entry(diff: dict[str, Any]) -> dict[str, Any]:
    """Формує запис для історії дифів."""

    return {
        "recorded_at": datetime.now(timezone.utc).isoformat(),
        "previous_model": diff.get("previous_model"),
        "current_model": diff.get("current_model"),
        "delta_accuracy_a": diff.get("delta_accuracy_a"),
        "delta_distance_b": diff.get("delta_distance_b"),
        "added_hashtags": diff.get("added_hashtags", []),
        "removed_hashtags": diff.get("removed_hashtags", []),
    }


def update_history(path: Path, diff: dict[str, Any], *, limit: int) -> list[dict[str, Any]]:
    """Додає диф до історії, зберігаючи обмежений розмір."""

    if limit < 1:
        raise ValueError("Ліміт історії має бути додатним")

    raw = load_json_or_default(path, [])
    if not isinstance(raw, list):
        raise ReportFormatError("Файл історії має містити список")

    raw.append(_prepare_history_entry(diff))
    trimmed = raw[-limit:]
    write_json(path, trimmed)
    return trimmed


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Порівняння двох JSON-звітів оцінювання моделей гумору"
    )
    parser.add_argument("previous", type=Path, help="Шлях до попереднього звіту")
    parser.add_argument("current", type=Path, help="Шлях до поточного звіту")
    parser.add_argument(
        "-o",
        "--output",
        type=Path,
        help="Необов'язковий шлях для збереження диф-результату у файл",
    )
    parser.add_argument(
        "--history",
        type=Path,
        help="Необов'язковий шлях до історичного журналу дифів",
    )
    parser.add_argument(
        "--history-limit",
        type=int,
        default=DEFAULT_HISTORY_LIMIT,
        help="Максимальна кількість записів в історії",
    )
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)

    try:
        diff = build_diff(_load_report(args.previous), _load_report(args.current))
        output = dump_json(diff)
        print(output)
        if args.output:
            write_json(args.output, diff)
        if args.history:
            update_history(args.history, diff, limit=args.history_limit)
    except (HumorLMError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return 1

    return 0


if __name__ == "__main__":  # pragma: no cover - ручний запуск
    raise SystemExit(main())
