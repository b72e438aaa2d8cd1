"""Командний інтерфейс: навчання моделей, оцінка твітів та експерименти.

Multi-command entry point wiring corpus → model → ranking::

    python -m scripts.humor_lm train --order 3 -o news.arpa corpus/
    python -m scripts.humor_lm score --model news.arpa --polarity news tweets.txt
    python -m scripts.humor_lm compare --model tweets.arpa pairs.tsv
    python -m scripts.humor_lm rank --model tweets.arpa data/gold/hashtag.tsv
    python -m scripts.humor_lm eval --model news.arpa --polarity news data/gold/
    python -m scripts.humor_lm perplexity --model news.arpa heldout.txt

Стандартний вивід містить лише результати, розділені TAB; діагностика
та прогрес ідуть у stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from pathlib import Path
from typing import Any, Callable, Iterator, Sequence, TypeVar

try:  # pragma: no cover
    from .arpa import read_arpa, write_arpa
    from .backoff_model import perplexity
    from .corpus import (
        DEFAULT_MIN_COUNT,
        MalformedRecord,
        TweetRecord,
        build_vocabulary,
        ingest_tweet_tsv,
        iter_plaintext,
        tokenize,
    )
    from .humor_rank import (
        EmptySet,
        ExperimentConfig,
        Polarity,
        SamePair,
        compare_pair,
        eval_subtask_b,
        load_gold_sets,
        run_experiment,
        score_hashtag,
        score_tweet,
        semi_rank,
    )
    from .kneser_ney import discounts_for, train
    from .ngram_counts import MAX_ORDER, MIN_ORDER, count_ngrams
    from .utils import (
        HumorLMError,
        expand_paths,
        iter_decoded_lines,
        load_json_or_default,
        write_json,
    )
except ImportError:  # pragma: no cover
    sys.path.append(str(Path(__file__).resolve().parent.parent))
    from scripts.arpa import read_arpa, write_arpa
    from scripts.backoff_model import perplexity
    from scripts.corpus import (
        DEFAULT_MIN_COUNT,
        MalformedRecord,
        TweetRecord,
        build_vocabulary,
        ingest_tweet_tsv,
        iter_plaintext,
        tokenize,
    )
    from scripts.humor_rank import (
        EmptySet,
        ExperimentConfig,
        Polarity,
        SamePair,
        compare_pair,
        eval_subtask_b,
        load_gold_sets,
        run_experiment,
        score_hashtag,
        score_tweet,
        semi_rank,
    )
    from scripts.kneser_ney import discounts_for, train
    from scripts.ngram_counts import MAX_ORDER, MIN_ORDER, count_ngrams
    from scripts.utils import (
        HumorLMError,
        expand_paths,
        iter_decoded_lines,
        load_json_or_default,
        write_json,
    )

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 3
DEFAULT_THREADS = 1
REPORT_FILE = Path("reports/eval_report.json")
EXPERIMENTS_FILE = Path("data/experiments.json")
STDIN = "-"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

T = TypeVar("T")
R = TypeVar("R")


class ConfigError(HumorLMError):
    """Некоректна конфігурація запуску (шляхи, набір моделей)."""


def _bounded_int(minimum: int, maximum: int | None = None) -> Callable[[str], int]:
    def parse(raw: str) -> int:
        try:
            value = int(raw)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"'{raw}' не є цілим числом") from exc
        if value < minimum or (maximum is not None and value > maximum):
            bounds = f"[{minimum}, {maximum}]" if maximum is not None else f"≥ {minimum}"
            raise argparse.ArgumentTypeError(f"значення {value} поза межами {bounds}")
        return value

    return parse


@dataclass(frozen=True)
class RunConfig:
    """Перевірені параметри одного запуску команди.

    Validated parameters of one command run, built from parsed arguments.
    """

    command: str
    order: int = DEFAULT_ORDER
    models: tuple[Path, ...] = ()
    data: tuple[Path, ...] = ()
    polarities: tuple[Polarity, ...] = (Polarity.HIGHER_IS_FUNNIER,)
    per_token: bool = False
    min_count: int = DEFAULT_MIN_COUNT
    report: Path | None = None
    output: Path | None = None
    threads: int = DEFAULT_THREADS
    corpus_format: str = "text"
    max_sentences: int | None = None
    experiments: Path | None = None

    def validate(self) -> None:
        """Перевіряє шляхи до початку будь-якої роботи."""

        if not MIN_ORDER <= self.order <= MAX_ORDER:
            raise ConfigError(f"Порядок n-грам має бути в межах [{MIN_ORDER}, {MAX_ORDER}]")
        if self.threads < 1:
            raise ConfigError("Кількість потоків має бути не меншою за 1")
        for path in (*self.models, *self.data):
            if str(path) != STDIN and not path.exists():
                raise ConfigError(f"Шлях не існує: {path}")
        if self.experiments is not None:
            if not self.experiments.exists():
                raise ConfigError(f"Файл експериментів не існує: {self.experiments}")
            for item in load_experiments(self.experiments):
                if not item.model.exists():
                    raise ConfigError(f"Модель експерименту {item.name} не існує: {item.model}")
        for target in (self.output, self.report):
            if target is not None:
                _check_writable(target)

    def experiment_configs(self) -> list[ExperimentConfig]:
        configs = [
            ExperimentConfig(name=model.stem, model=model, polarity=polarity, per_token=self.per_token)
            for model, polarity in zip(self.models, self.polarities)
        ]
        if self.experiments is not None:
            configs.extend(load_experiments(self.experiments))
        return configs


def _check_writable(path: Path) -> None:
    if path.is_dir():
        raise ConfigError(f"Шлях для запису є каталогом: {path}")
    ancestor = path.parent
    while not ancestor.exists():
        ancestor = ancestor.parent
    if not ancestor.is_dir() or not os.access(ancestor, os.W_OK):
        raise ConfigError(f"Неможливо записати файл: {path}")


def load_experiments(path: Path) -> list[ExperimentConfig]:
    """Завантажує сітку експериментів з JSON-файла.

    Load the experiment grid leniently: entries without a model are skipped,
    an unknown polarity is skipped with a warning.
    """

    data = load_json_or_default(path, {})
    experiments: list[ExperimentConfig] = []
    for item in data.get("experiments", []):
        model = str(item.get("model", "")).strip()
        if not model:
            continue
        try:
            polarity = Polarity.from_name(str(item.get("polarity", Polarity.HIGHER_IS_FUNNIER.value)))
        except ValueError as exc:
            logger.warning("Пропущено експеримент %s: %s", item.get("name", model), exc)
            continue
        experiments.append(
            ExperimentConfig(
                name=str(item.get("name", Path(model).stem)),
                model=Path(model),
                polarity=polarity,
                per_token=bool(item.get("per_token", False)),
            )
        )
    return experiments


def _parallel_map(func: Callable[[T], R], items: Sequence[T], threads: int) -> list[R]:
    if threads == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(func, items))


@contextlib.contextmanager
def _input_lines(path: Path) -> Iterator[Iterator[tuple[int, str]]]:
    if str(path) == STDIN:
        yield iter_decoded_lines(sys.stdin)
        return
    with path.open("rb") as handle:
        yield iter_decoded_lines(handle)


def load_training_sentences(
    paths: Sequence[Path], corpus_format: str, max_sentences: int | None = None
) -> list[list[str]]:
    """Читає навчальний корпус: новини як текст або твіти з TSV-файлів.

    Read the training corpus, optionally truncated to the first
    ``max_sentences`` sentences.
    """

    def sentences() -> Iterator[list[str]]:
        if corpus_format == "tsv":
            for path in expand_paths(paths, suffix=".tsv"):
                for record in ingest_tweet_tsv(path).tweets:
                    yield tokenize(record.text)
        else:
            for path in expand_paths(paths):
                yield from iter_plaintext(path)

    return list(islice(sentences(), max_sentences))


def cmd_train(config: RunConfig) -> int:
    sentences = load_training_sentences(config.data, config.corpus_format, config.max_sentences)
    logger.info("Прочитано %d речень", len(sentences))
    vocab = build_vocabulary(sentences, config.min_count)
    counts = count_ngrams(sentences, vocab, config.order, workers=config.threads)
    discounts = discounts_for(counts)
    model = train(counts, discounts, vocab, config.order)
    if config.output is None:
        raise ConfigError("Не задано шлях до ARPA-файла")
    config.output.parent.mkdir(parents=True, exist_ok=True)
    write_arpa(model, config.output)
    for k in range(1, config.order + 1):
        print(f"ngram {k}={model.entry_count(k)}")
    for k in range(1, config.order + 1):
        d1, d2, d3plus = discounts[k].as_tuple()
        print(f"discount\t{k}\t{d1:.6f}\t{d2:.6f}\t{d3plus:.6f}")
    return 0


def cmd_score(config: RunConfig) -> int:
    model = read_arpa(config.models[0])
    polarity = config.polarities[0]
    with _input_lines(config.data[0]) as lines:
        records = [TweetRecord(tweet_id=str(number), text=text) for number, text in lines]
    scored = _parallel_map(
        lambda record: score_tweet(model, polarity, config.per_token, record), records, config.threads
    )
    for item in scored:
        print(f"{item.score:.6f}\t{item.log10_prob:.6f}\t{item.token_count}")
    return 0


def cmd_compare(config: RunConfig) -> int:
    model = read_arpa(config.models[0])
    polarity = config.polarities[0]
    pairs: list[tuple[int, TweetRecord, TweetRecord]] = []
    with _input_lines(config.data[0]) as lines:
        for number, line in lines:
            fields = line.split("\t")
            if len(fields) != 4 or not fields[0].strip() or not fields[2].strip():
                raise MalformedRecord(number, "очікувалось 4 поля: id_a, text_a, id_b, text_b")
            pairs.append(
                (
                    number,
                    TweetRecord(tweet_id=fields[0].strip(), text=fields[1]),
                    TweetRecord(tweet_id=fields[2].strip(), text=fields[3]),
                )
            )
    for number, first, second in pairs:
        if first.tweet_id == second.tweet_id:
            raise MalformedRecord(number, str(SamePair(first.tweet_id)))

    def winner(item: tuple[int, TweetRecord, TweetRecord]) -> str:
        _, first, second = item
        return compare_pair(
            score_tweet(model, polarity, config.per_token, first),
            score_tweet(model, polarity, config.per_token, second),
        )

    for tweet_id in _parallel_map(winner, pairs, config.threads):
        print(tweet_id)
    return 0


def cmd_rank(config: RunConfig) -> int:
    model = read_arpa(config.models[0])
    hashtag_set = ingest_tweet_tsv(config.data[0])
    if not len(hashtag_set):
        raise EmptySet(hashtag_set.hashtag)
    scored = score_hashtag(model, config.polarities[0], config.per_token, hashtag_set)
    ranking = semi_rank(scored)
    by_id = {item.tweet_id: item for item in scored}
    sections = (("top1", (ranking.top1,)), ("next9", ranking.next9), ("rest", ranking.rest))
    for bucket, ids in sections:
        for tweet_id in ids:
            print(f"{bucket}\t{tweet_id}\t{by_id[tweet_id].score:.6f}")
    if any(record.gold is not None for record in hashtag_set.tweets):
        print(f"distance_b\t{eval_subtask_b(hashtag_set, ranking):.6f}")
    return 0


def cmd_eval(config: RunConfig) -> int:
    experiments = config.experiment_configs()
    if not experiments:
        raise ConfigError("Не задано жодної моделі: використайте --model або --experiments")
    gold = load_gold_sets(config.data)
    if gold.skipped_files:
        logger.warning(
            "Пропущено файлів: %d (%s)",
            len(gold.skipped_files),
            ", ".join(item["path"] for item in gold.skipped_files),
        )
    reports = [run_experiment(item, gold, workers=config.threads) for item in experiments]
    document: dict[str, Any]
    if len(reports) == 1:
        document = reports[0].as_dict()
    else:
        document = {"runs": [report.as_dict() for report in reports]}
    if config.report is None:
        raise ConfigError("Не задано шлях до звіту")
    write_json(config.report, document)
    for report in reports:
        print(f"{report.model}\t{report.polarity}\t{report.accuracy_a:.6f}\t{report.distance_b:.6f}")
    return 0


def cmd_perplexity(config: RunConfig) -> int:
    model = read_arpa(config.models[0])
    sentences: list[list[str]] = []
    for path in expand_paths(config.data):
        sentences.extend(iter_plaintext(path))
    value = perplexity(model, sentences)
    positions = sum(len(sentence) + 1 for sentence in sentences)
    print(f"{value:.6f}\t{positions}\t{len(sentences)}")
    return 0


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "train": cmd_train,
    "score": cmd_score,
    "compare": cmd_compare,
    "rank": cmd_rank,
    "eval": cmd_eval,
    "perplexity": cmd_perplexity,
}


def _add_scoring_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", type=Path, required=True, help="ARPA-модель")
    parser.add_argument(
        "--polarity",
        choices=[item.value for item in Polarity],
        default=Polarity.HIGHER_IS_FUNNIER.value,
        help="funny: смішніше = імовірніше; news: смішніше = менш імовірне",
    )
    parser.add_argument("--per-token", action="store_true", help="Нормалізувати бал на позицію")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="Докладніший журнал")
    common.add_argument(
        "--threads",
        type=_bounded_int(1),
        default=DEFAULT_THREADS,
        help="Кількість робочих потоків",
    )
    parser = argparse.ArgumentParser(
        description="Оцінювання гумору твітів n-грамними мовними моделями",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train_parser = commands.add_parser(
        "train", parents=[common], help="Навчити модель і записати ARPA-файл"
    )
    train_parser.add_argument("corpus", type=Path, nargs="+", help="Файли або каталоги корпусу")
    train_parser.add_argument("--order", type=_bounded_int(MIN_ORDER, MAX_ORDER), default=DEFAULT_ORDER)
    train_parser.add_argument("--min-count", type=_bounded_int(1), default=DEFAULT_MIN_COUNT)
    train_parser.add_argument("--format", choices=("text", "tsv"), default="text", dest="corpus_format")
    train_parser.add_argument("--max-sentences", type=_bounded_int(1), default=None)
    train_parser.add_argument("-o", "--output", type=Path, required=True, help="Шлях до ARPA-файла")

    score_parser = commands.add_parser(
        "score", parents=[common], help="Оцінити кожен рядок входу"
    )
    _add_scoring_flags(score_parser)
    score_parser.add_argument("input", type=Path, nargs="?", default=Path(STDIN))

    compare_parser = commands.add_parser(
        "compare", parents=[common], help="Обрати смішніший твіт у кожній парі"
    )
    _add_scoring_flags(compare_parser)
    compare_parser.add_argument("input", type=Path, nargs="?", default=Path(STDIN))

    rank_parser = commands.add_parser(
        "rank", parents=[common], help="Розбити твіти хештегу на Top1/Next9/решту"
    )
    _add_scoring_flags(rank_parser)
    rank_parser.add_argument("hashtag_file", type=Path)

    eval_parser = commands.add_parser(
        "eval", parents=[common], help="Оцінити моделі на мічених хештегах"
    )
    eval_parser.add_argument("data", type=Path, nargs="+", help="Каталоги або файли <hashtag>.tsv")
    eval_parser.add_argument("--model", type=Path, action="append", default=[], dest="models")
    eval_parser.add_argument(
        "--polarity",
        choices=[item.value for item in Polarity],
        action="append",
        default=[],
        dest="polarities",
        help="Одна на всі моделі або по одній на кожну --model",
    )
    eval_parser.add_argument("--per-token", action="store_true")
    eval_parser.add_argument("--report", type=Path, default=None)
    eval_parser.add_argument("--experiments", type=Path, default=None)

    ppl_parser = commands.add_parser(
        "perplexity", parents=[common], help="Перплексія моделі на тексті"
    )
    ppl_parser.add_argument("--model", type=Path, required=True)
    ppl_parser.add_argument("corpus", type=Path, nargs="+")
    return parser


def _polarities(raw: Sequence[str], count: int, parser: argparse.ArgumentParser) -> tuple[Polarity, ...]:
    values = [Polarity.from_name(item) for item in raw] or [Polarity.HIGHER_IS_FUNNIER]
    if len(values) == 1:
        return tuple(values) * max(count, 1)
    if len(values) != count:
        parser.error("Кількість --polarity має дорівнювати 1 або кількості --model")
    return tuple(values)


def build_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> RunConfig:
    """Перетворює розібрані аргументи на :class:`RunConfig`."""

    command = args.command
    common: dict[str, Any] = {"command": command, "threads": args.threads}
    if command == "train":
        return RunConfig(
            **common,
            order=args.order,
            data=tuple(args.corpus),
            min_count=args.min_count,
            output=args.output,
            corpus_format=args.corpus_format,
            max_sentences=args.max_sentences,
        )
    if command == "eval":
        experiments = args.experiments
        if experiments is None and not args.models:
            experiments = EXPERIMENTS_FILE
        return RunConfig(
            **common,
            models=tuple(args.models),
            data=tuple(args.data),
            polarities=_polarities(args.polarities, len(args.models), parser),
            per_token=args.per_token,
            report=args.report or REPORT_FILE,
            experiments=experiments,
        )
    if command == "perplexity":
        return RunConfig(**common, models=(args.model,), data=tuple(args.corpus))
    data = args.hashtag_file if command == "rank" else args.input
    return RunConfig(
        **common,
        models=(args.model,),
        data=(data,),
        polarities=(Polarity.from_name(args.polarity),),
        per_token=args.per_token,
    )


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT, force=True)


def main(argv: list[str] | None = None) -> int:
    """Головна функція CLI; повертає 0 лише за повного результату.

    Parse arguments, validate paths and run one command. Package errors and
    I/O errors are reported as one line on stderr with exit status 1.
    """

    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = build_config(args, parser)
        config.validate()
        return COMMANDS[config.command](config)
    except (HumorLMError, OSError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":  # pragma: no cover - ручний запуск
    raise SystemExit(main())
