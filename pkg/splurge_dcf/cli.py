"""Command-line interface for splurge-dcf.

Commands:

    train    Train a cascade and write the model file (``--baseline`` also trains
             the manual-feature random forest on the same split).
    eval     Evaluate a saved model on a labeled corpus.
    predict  Label messages read one per line from a file or standard input.
    report   Render a saved JSON report as a plain-text table.

Settings come from defaults, ``--config`` (``key = value`` lines),
``SPLURGE_DCF_*`` environment variables and flags, in increasing precedence.
Exit codes: 0 success, 1 usage or invalid value, 2 data error, 3 model error.

Examples:

    splurge-dcf train --dataset SMSSpamCollection --embeddings glove.6B.100d.txt --model dcf.bin
    splurge-dcf eval --dataset SMSSpamCollection --embeddings glove.6B.100d.txt --model dcf.bin
    echo "WIN cash now" | splurge-dcf predict --embeddings glove.6B.100d.txt --model dcf.bin

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any, NoReturn, TextIO

from . import __version__
from .baseline import train_baseline
from .cascade import CascadeModel, TrainReport, predict_messages, train_cascade
from .common_utils import atomic_write_text
from .config import (
    FIELD_NAMES,
    RunConfig,
    build_run_config,
    coerce_value,
    env_overrides,
    parse_config_file,
)
from .convnet import Pooling
from .corpus import LABEL_NAMES, TokenizedMessage, load_dataset, preprocess, split_dataset, tokenize_messages
from .embedding import EmbeddingTable, load_embeddings
from .exceptions import SplurgeDcfDataError, SplurgeDcfError, SplurgeDcfModelError, SplurgeDcfValueError
from .forest import ExtraTreesSplit
from .metrics import EvalReport, evaluate
from .model_file import load_model, save_model

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
SUBSETS = ("test", "validation", "all")


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_settings(parser: argparse.ArgumentParser) -> None:
    paths = parser.add_argument_group("paths")
    paths.add_argument("--config", help="flat 'key = value' configuration file")
    paths.add_argument("--dataset", help="labeled corpus, 'ham|spam<TAB>text' per line")
    paths.add_argument("--embeddings", help="text word-vector file")
    paths.add_argument("--model", help="model file to write or read")
    paths.add_argument("--report", help="JSON report file to write (train/eval) or read (report)")
    paths.add_argument("--wordlist", help="baseline spelling wordlist")
    paths.add_argument("--blacklist", help="baseline URL host blacklist")
    paths.add_argument("--stopwords", help="custom stop-word list")

    model = parser.add_argument_group("model")
    model.add_argument("--seed", help="master seed (default 42)")
    model.add_argument("--n-filters", dest="n_filters", help="filters per level, L (default 64)")
    model.add_argument("--kernel-size", dest="kernel_size", help="kernel size, k (default 2)")
    model.add_argument("--embedding-dim", dest="embedding_dim", help="word-vector dimension, d (default 100)")
    model.add_argument("--n-trees", dest="n_trees", help="trees per forest (default 100)")
    model.add_argument("--epsilon", help="minimum validation accuracy gain per level (default 0.001)")
    model.add_argument("--max-levels", dest="max_levels", help="level cap (default 10)")
    model.add_argument("--folds", help="cross-fit folds (default 3)")
    model.add_argument("--cross-fit", dest="cross_fit", action=argparse.BooleanOptionalAction, default=None)
    model.add_argument("--smote-k", dest="smote_k", help="SMOTE neighbours (default 5)")
    model.add_argument("--pooling", choices=[p.value for p in Pooling])
    model.add_argument("--forest-kinds", dest="forest_kinds", help="four comma-separated forest kinds")
    model.add_argument("--extra-trees-split", dest="extra_trees_split", choices=[r.value for r in ExtraTreesSplit])
    model.add_argument("--n-jobs", dest="n_jobs", help="parallel tree-fitting workers (default 1)")

    data = parser.add_argument_group("data")
    data.add_argument("--train-ratio", dest="train_ratio")
    data.add_argument("--validation-ratio", dest="validation_ratio")
    data.add_argument("--test-ratio", dest="test_ratio")
    data.add_argument("--lowercase", action=argparse.BooleanOptionalAction, default=None)
    data.add_argument("--remove-stopwords", dest="remove_stopwords", action=argparse.BooleanOptionalAction, default=None)
    data.add_argument("--stem", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="splurge-dcf",
        description="splurge-dcf - convolutional forest cascade for SMS spam detection",
    )
    parser.add_argument("--version", action="version", version=f"splurge-dcf {__version__}")
    parser.add_argument(
        "--log-level",
        dest="log_level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging level for standard error (default INFO)",
    )
    commands = parser.add_subparsers(dest="command")

    train = commands.add_parser("train", help="train a cascade and save the model")
    _add_settings(train)
    train.add_argument("--baseline", action=argparse.BooleanOptionalAction, default=None, help="also train the manual-feature baseline")

    evaluate_cmd = commands.add_parser("eval", help="evaluate a saved model")
    _add_settings(evaluate_cmd)
    evaluate_cmd.add_argument("--subset", choices=SUBSETS, default="test")

    predict = commands.add_parser("predict", help="label messages from a file or standard input")
    _add_settings(predict)
    predict.add_argument("--input", dest="input_path", help="one message per line (default: standard input)")

    report = commands.add_parser("report", help="render a saved JSON report")
    _add_settings(report)
    report.add_argument("report_path", nargs="?", help="report file (overrides --report)")
    return parser


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise SplurgeDcfValueError(
            message=f"Missing required setting(s): {', '.join('--' + name for name in missing)}",
            error_code="missing-setting",
            details={"param": ",".join(missing)},
        )


def _vocabulary(messages: Iterable[TokenizedMessage]) -> set[str]:
    return {token for message in messages for token in message.tokens}


def _load_corpus(config: RunConfig) -> list[TokenizedMessage]:
    assert config.dataset is not None
    return tokenize_messages(load_dataset(config.dataset), config.preprocess_config())


def _load_table(config: RunConfig, vocabulary: Iterable[str], dim: int) -> EmbeddingTable:
    assert config.embeddings is not None
    return load_embeddings(config.embeddings, dim, vocabulary=set(vocabulary))


def _write_report(config: RunConfig, payload: Mapping[str, Any]) -> None:
    if config.report is not None:
        atomic_write_text(config.report, json.dumps(payload, indent=2, sort_keys=True) + "\n")
        logger.info("Wrote report to %s", config.report)


def _evaluate_model(model: CascadeModel, messages: tuple[TokenizedMessage, ...], table: EmbeddingTable, label: str) -> EvalReport:
    labels, p_spam = predict_messages(model, messages, table)
    return evaluate([message.label for message in messages], p_spam, labels, label=label)


def cmd_train(config: RunConfig, *, out: TextIO | None = None) -> int:
    """Train, save the model and print the training report.

    Returns:
        int: Exit code.
    """
    stream = out or sys.stdout
    _require(config, "dataset", "embeddings", "model")
    messages = _load_corpus(config)
    split = split_dataset(messages, config.ratios, config.seed)
    table = _load_table(config, _vocabulary(messages), config.embedding_dim)

    model, report = train_cascade(split, config.cascade_config(), table, metadata=config.to_header())
    assert config.model is not None
    save_model(model, config.model)
    print(report.format_table(), file=stream)

    payload: dict[str, Any] = {"kind": "train", "train": report.to_dict(), "model": model.describe(), "evaluations": []}
    if config.baseline:
        if split.test:
            dcf_report = _evaluate_model(model, split.test, table, "dcf (test)")
            payload["evaluations"].append(dcf_report.to_dict())
            print(dcf_report.format_table(), file=stream)
        _, baseline_report = train_baseline(split, config.baseline_config())
        payload["evaluations"].append(baseline_report.to_dict())
        print(baseline_report.format_table(), file=stream)
    _write_report(config, payload)
    return EXIT_OK


def apply_model_header(config: RunConfig, model: CascadeModel, explicit: Iterable[str] = ()) -> RunConfig:
    """Replace model-defining settings with the values stored in the model.

    A warning is logged for every explicitly given setting that the model
    header overrides.
    """
    header = dict(model.metadata)
    stored: dict[str, Any] = dict(model.config.to_dict())
    stored.update(header.get("preprocess", {}))
    stored.update(header.get("split", {}))
    stored.pop("n_jobs", None)

    given = set(explicit)
    replacements: dict[str, Any] = {}
    for key, value in stored.items():
        if key not in FIELD_NAMES:
            continue
        current = getattr(config, key)
        if key == "forest_kinds":
            current_plain = [k.value for k in current]
        elif isinstance(current, Path):
            current_plain = str(current)
        else:
            current_plain = getattr(current, "value", current)
        if current_plain != value:
            if key in given:
                logger.warning("Model file sets %s=%s; ignoring configured value %s", key, value, current_plain)
            replacements[key] = value
    if not replacements:
        return config

    return dataclasses.replace(config, **{key: coerce_value(key, value) for key, value in replacements.items()})


def cmd_eval(config: RunConfig, *, subset: str = "test", explicit: Iterable[str] = (), out: TextIO | None = None) -> int:
    """Evaluate a saved model and print its report.

    Returns:
        int: Exit code.
    """
    stream = out or sys.stdout
    _require(config, "model", "dataset", "embeddings")
    assert config.model is not None
    model = load_model(config.model)
    effective = apply_model_header(config, model, explicit)

    messages = _load_corpus(effective)
    split = split_dataset(messages, effective.ratios, effective.seed)
    selected = split.subset(subset)
    if not selected:
        raise SplurgeDcfValueError(
            message=f"The {subset} subset is empty",
            details={"param": "subset", "value": subset},
        )
    table = _load_table(effective, _vocabulary(selected), model.embedding_dim)
    report = _evaluate_model(model, selected, table, f"dcf ({subset})")
    print(report.format_table(), file=stream)
    _write_report(config, {"kind": "eval", "model": model.describe(), "evaluations": [report.to_dict()]})
    return EXIT_OK


def _read_lines(input_path: str | None, stdin: TextIO) -> list[str]:
    if input_path is None:
        return [line.rstrip("\r\n") for line in stdin]
    try:
        text = Path(input_path).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Input file not found: {input_path}",
            error_code="file-not-found",
            details={"path": input_path},
        ) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read input file {input_path}: {e}",
            details={"path": input_path},
        ) from e
    return text.splitlines()


def cmd_predict(
    config: RunConfig,
    *,
    input_path: str | None = None,
    explicit: Iterable[str] = (),
    stdin: TextIO | None = None,
    out: TextIO | None = None,
) -> int:
    """Print ``<ham|spam><TAB><p_spam>`` for every input line.

    Returns:
        int: Exit code.
    """
    stream = out or sys.stdout
    _require(config, "model")
    assert config.model is not None
    model = load_model(config.model)
    lines = _read_lines(input_path, stdin or sys.stdin)
    if not lines:
        return EXIT_OK

    _require(config, "embeddings")
    effective = apply_model_header(config, model, explicit)
    preprocess_config = effective.preprocess_config()
    token_lists = [preprocess(line, preprocess_config) for line in lines]
    table = _load_table(effective, (token for tokens in token_lists for token in tokens), model.embedding_dim)
    labels, p_spam = predict_messages(model, token_lists, table)
    for label, probability in zip(labels, p_spam, strict=True):
        print(f"{LABEL_NAMES[int(label)]}\t{probability:.4f}", file=stream)
    return EXIT_OK


def cmd_report(config: RunConfig, *, report_path: str | None = None, out: TextIO | None = None) -> int:
    """Render a JSON report written by ``train`` or ``eval``.

    Returns:
        int: Exit code.
    """
    stream = out or sys.stdout
    path = Path(report_path) if report_path is not None else config.report
    if path is None:
        raise SplurgeDcfValueError(
            message="Missing required setting: --report",
            error_code="missing-setting",
            details={"param": "report"},
        )
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Report file not found: {path}",
            error_code="file-not-found",
            details={"path": str(path)},
        ) from e
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read report file {path}: {e}",
            details={"path": str(path)},
        ) from e
    if not isinstance(payload, dict):
        raise SplurgeDcfDataError(message=f"Report file {path} does not hold a JSON object", details={"path": str(path)})

    sections: list[str] = []
    if "model" in payload:
        summary = payload["model"]
        sections.append("Model\n" + "\n".join(f"{key}: {summary[key]}" for key in sorted(summary)))
    if "train" in payload:
        sections.append(TrainReport.from_dict(payload["train"]).format_table())
    sections.extend(EvalReport.from_dict(item).format_table() for item in payload.get("evaluations", []))
    print("\n\n".join(sections), file=stream)
    return EXIT_OK


def _exit_code(error: SplurgeDcfError) -> int:
    if isinstance(error, SplurgeDcfModelError):
        return EXIT_MODEL
    if isinstance(error, SplurgeDcfDataError):
        return EXIT_DATA
    return EXIT_USAGE


def main(args: list[str] | None = None) -> int:
    """Main entry point for the command-line interface.

    Args:
        args: Command-line arguments (defaults to sys.argv[1:]).

    Returns:
        int: Exit code (0 for success).
    """
    parser = build_parser()
    namespace = parser.parse_args(args)
    if namespace.command is None:
        parser.print_help()
        return EXIT_OK

    logging.basicConfig(level=namespace.log_level, format=LOG_FORMAT, stream=sys.stderr)
    try:
        file_values = parse_config_file(namespace.config) if namespace.config else {}
        env_values = env_overrides()
        flag_values = {
            name: getattr(namespace, name) for name in FIELD_NAMES if getattr(namespace, name, None) is not None
        }
        config = build_run_config(file_values, env_values, flag_values)
        explicit = set(file_values) | set(env_values) | set(flag_values)

        if namespace.command == "train":
            return cmd_train(config)
        if namespace.command == "eval":
            return cmd_eval(config, subset=namespace.subset, explicit=explicit)
        if namespace.command == "predict":
            return cmd_predict(config, input_path=namespace.input_path, explicit=explicit)
        return cmd_report(config, report_path=namespace.report_path)
    except SplurgeDcfError as e:
        print(f"splurge-dcf: error: {e}", file=sys.stderr)
        return _exit_code(e)
    except OSError as e:
        print(f"splurge-dcf: error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
