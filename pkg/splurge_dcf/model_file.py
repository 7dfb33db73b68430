"""Binary model file format for trained cascades.

Layout (all integers little-endian)::

    magic            4 bytes  b"SDCF"
    version          uint16
    header_length    uint32
    header           header_length bytes of UTF-8 JSON (sorted keys)
    level section    repeated once per level:
        section_length  uint64
        section         section_length bytes (see ``_encode_level``)
    checksum         32 bytes, SHA-256 of every preceding byte

The loader checks magic, version and checksum before decoding anything, so a
corrupt or foreign file never yields a partial model. See
``docs/model-format.md`` for the field-by-field section layout.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .cascade import CascadeLevel, CascadeModel, StopReason
from .common_utils import atomic_write_bytes
from .config import CascadeConfig
from .convnet import FilterBank
from .exceptions import SplurgeDcfError, SplurgeDcfModelError
from .forest import DecisionTree, ExtraTreesSplit, Forest, ForestKind

logger = logging.getLogger(__name__)

MAGIC = b"SDCF"
FORMAT_VERSION = 1
CHECKSUM_SIZE = 32

_PREAMBLE = struct.Struct("<4sHI")
_SECTION_LENGTH = struct.Struct("<Q")
_LEVEL_HEAD = struct.Struct("<IIIIQ")  # level_index, n_filters, input_dim, kernel_size, bank seed
_FOREST_HEAD = struct.Struct("<BBQII")  # kind, split rule, seed, feature_count, n_trees
_COUNT = struct.Struct("<I")

_KIND_CODES: dict[ForestKind, int] = {ForestKind.RANDOM_FOREST: 0, ForestKind.EXTRA_TREES: 1}
_RULE_CODES: dict[ExtraTreesSplit, int] = {ExtraTreesSplit.RANDOM_FEATURE: 0, ExtraTreesSplit.BEST_OF_RANDOM: 1}


def _encode_tree(tree: DecisionTree) -> bytes:
    return b"".join(
        [
            _COUNT.pack(tree.node_count),
            tree.feature.astype("<i4").tobytes(),
            tree.threshold.astype("<f8").tobytes(),
            tree.left.astype("<i4").tobytes(),
            tree.right.astype("<i4").tobytes(),
            tree.counts.astype("<i8").tobytes(),
        ]
    )


def _encode_level(level: CascadeLevel) -> bytes:
    bank = level.bank
    parts = [
        _LEVEL_HEAD.pack(level.level_index, bank.n_filters, bank.input_dim, bank.kernel_size, bank.seed),
        bank.weights.astype("<f8").tobytes(),
        _COUNT.pack(len(level.forests)),
    ]
    for forest in level.forests:
        parts.append(
            _FOREST_HEAD.pack(
                _KIND_CODES[forest.kind],
                _RULE_CODES[forest.split_rule],
                forest.seed,
                forest.feature_count,
                forest.n_trees,
            )
        )
        parts.extend(_encode_tree(tree) for tree in forest.trees)
    return b"".join(parts)


def _header(model: CascadeModel) -> dict[str, Any]:
    return {
        "format": "splurge-dcf",
        "config": model.config.to_dict(),
        "levels": len(model.levels),
        "stop_reason": model.stop_reason.value,
        "metadata": dict(model.metadata),
    }


def encode_model(model: CascadeModel) -> bytes:
    """Serialise a model to bytes; equal models always give equal bytes."""
    header = json.dumps(_header(model), sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [_PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)), header]
    for level in model.levels:
        section = _encode_level(level)
        parts.append(_SECTION_LENGTH.pack(len(section)))
        parts.append(section)
    payload = b"".join(parts)
    return payload + hashlib.sha256(payload).digest()


def save_model(model: CascadeModel, path: str | os.PathLike[str]) -> Path:
    """Write a model file atomically.

    Args:
        model (CascadeModel): Trained cascade.
        path (str | PathLike): Destination.

    Returns:
        Path: The written file.
    """
    target = atomic_write_bytes(path, encode_model(model))
    logger.info("Saved %d-level model to %s", len(model.levels), target)
    return target


class _Reader:
    """Bounds-checked cursor over a payload."""

    def __init__(self, data: bytes, offset: int = 0) -> None:
        self._data = data
        self._offset = offset

    @property
    def remaining(self) -> int:
        return len(self._data) - self._offset

    def take(self, size: int) -> bytes:
        if size < 0 or size > self.remaining:
            raise SplurgeDcfModelError(
                message=f"Model file truncated: needed {size} bytes at offset {self._offset}",
                error_code="truncated",
                details={"offset": str(self._offset), "size": str(size)},
            )
        chunk = self._data[self._offset : self._offset + size]
        self._offset += size
        return chunk

    def unpack(self, layout: struct.Struct) -> tuple[Any, ...]:
        return layout.unpack(self.take(layout.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        item = np.dtype(dtype)
        return np.frombuffer(self.take(item.itemsize * count), dtype=item).astype(item.newbyteorder("="))


def _decode_tree(reader: _Reader) -> DecisionTree:
    (n_nodes,) = reader.unpack(_COUNT)
    return DecisionTree(
        feature=reader.array("<i4", n_nodes),
        threshold=reader.array("<f8", n_nodes),
        left=reader.array("<i4", n_nodes),
        right=reader.array("<i4", n_nodes),
        counts=reader.array("<i8", 2 * n_nodes).reshape(n_nodes, 2),
    )


def _decode_level(section: bytes) -> CascadeLevel:
    reader = _Reader(section)
    level_index, n_filters, input_dim, kernel_size, bank_seed = reader.unpack(_LEVEL_HEAD)
    weights = reader.array("<f8", n_filters * input_dim * kernel_size).reshape(n_filters, input_dim, kernel_size)
    bank = FilterBank(weights=weights, seed=int(bank_seed))

    kinds = {code: kind for kind, code in _KIND_CODES.items()}
    rules = {code: rule for rule, code in _RULE_CODES.items()}
    (forest_count,) = reader.unpack(_COUNT)
    forests: list[Forest] = []
    for _ in range(forest_count):
        kind_code, rule_code, seed, feature_count, n_trees = reader.unpack(_FOREST_HEAD)
        if kind_code not in kinds or rule_code not in rules:
            raise SplurgeDcfModelError(
                message=f"Unknown forest kind {kind_code} or split rule {rule_code}",
                error_code="corrupt",
                details={"level": str(level_index)},
            )
        trees = tuple(_decode_tree(reader) for _ in range(n_trees))
        forests.append(
            Forest(
                kind=kinds[kind_code],
                trees=trees,
                seed=int(seed),
                feature_count=int(feature_count),
                split_rule=rules[rule_code],
            )
        )
    if reader.remaining:
        raise SplurgeDcfModelError(
            message=f"Level {level_index} section has {reader.remaining} trailing bytes",
            error_code="corrupt",
            details={"level": str(level_index)},
        )
    return CascadeLevel(level_index=int(level_index), bank=bank, forests=tuple(forests))


def read_header(data: bytes) -> tuple[dict[str, Any], int]:
    """Validate magic, version and checksum, then decode the JSON header.

    Returns:
        tuple[dict, int]: The header and the offset of the first level section.

    Raises:
        SplurgeDcfModelError: For a foreign, future-version or corrupt file.
    """
    if len(data) < _PREAMBLE.size + CHECKSUM_SIZE:
        raise SplurgeDcfModelError(
            message="Model file is too short to be valid",
            error_code="truncated",
            details={"size": str(len(data))},
        )
    magic, version, header_length = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise SplurgeDcfModelError(
            message="Not a splurge-dcf model file (bad magic bytes)",
            error_code="bad-magic",
            details={"magic": magic.hex()},
        )
    if version != FORMAT_VERSION:
        raise SplurgeDcfModelError(
            message=f"Unsupported model format version {version}; this build reads version {FORMAT_VERSION}",
            error_code="version-mismatch",
            details={"version": str(version), "supported": str(FORMAT_VERSION)},
        )
    payload, checksum = data[:-CHECKSUM_SIZE], data[-CHECKSUM_SIZE:]
    if hashlib.sha256(payload).digest() != checksum:
        raise SplurgeDcfModelError(
            message="Model file checksum mismatch; the file is corrupt or truncated",
            error_code="checksum-mismatch",
            details={},
        )
    reader = _Reader(payload, _PREAMBLE.size)
    try:
        header = json.loads(reader.take(header_length).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SplurgeDcfModelError(
            message=f"Model header is not valid JSON: {e}",
            error_code="corrupt",
            details={},
        ) from e
    return header, _PREAMBLE.size + header_length


def decode_model(data: bytes) -> CascadeModel:
    """Rebuild a model from bytes produced by :func:`encode_model`.

    Raises:
        SplurgeDcfModelError: For any format, version or integrity problem.
    """
    header, offset = read_header(data)
    reader = _Reader(data[:-CHECKSUM_SIZE], offset)
    try:
        levels = []
        for _ in range(int(header["levels"])):
            (section_length,) = reader.unpack(_SECTION_LENGTH)
            levels.append(_decode_level(reader.take(section_length)))
        if reader.remaining:
            raise SplurgeDcfModelError(
                message=f"Model file has {reader.remaining} unexpected trailing bytes",
                error_code="corrupt",
                details={},
            )
        return CascadeModel(
            levels=tuple(levels),
            config=CascadeConfig.from_dict(header["config"]),
            stop_reason=StopReason(header["stop_reason"]),
            metadata=header.get("metadata", {}),
        )
    except SplurgeDcfModelError:
        raise
    except (SplurgeDcfError, KeyError, TypeError, ValueError) as e:
        raise SplurgeDcfModelError(
            message=f"Model file content is inconsistent: {e}",
            error_code="corrupt",
            details={},
        ) from e


def load_model(path: str | os.PathLike[str]) -> CascadeModel:
    """Read a model file.

    Args:
        path (str | PathLike): File written by :func:`save_model`.

    Returns:
        CascadeModel: The model.

    Raises:
        SplurgeDcfModelError: If the file is missing, unreadable, foreign, of
            another format version, or fails its checksum.
    """
    model_path = Path(path)
    try:
        data = model_path.read_bytes()
    except FileNotFoundError as e:
        raise SplurgeDcfModelError(
            message=f"Model file not found: {model_path}",
            error_code="file-not-found",
            details={"path": str(model_path)},
        ) from e
    except OSError as e:
        raise SplurgeDcfModelError(
            message=f"Cannot read model file {model_path}: {e}",
            details={"path": str(model_path)},
        ) from e
    model = decode_model(data)
    logger.info("Loaded %d-level model from %s", len(model.levels), model_path)
    return model


def read_model_header(path: str | os.PathLike[str]) -> dict[str, Any]:
    """Header of a model file, validated but without decoding the levels."""
    model_path = Path(path)
    try:
        data = model_path.read_bytes()
    except OSError as e:
        raise SplurgeDcfModelError(
            message=f"Cannot read model file {model_path}: {e}",
            error_code="file-not-found" if isinstance(e, FileNotFoundError) else None,
            details={"path": str(model_path)},
        ) from e
    header, _ = read_header(data)
    return header
