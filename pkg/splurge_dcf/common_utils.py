"""Common utility functions for splurge-dcf package.

This module provides small helpers shared across modules: seed derivation so
every random component can be reproduced on its own, atomic file writes, and
row padding for word matrices.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

import os
import tempfile
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, TypeVar

import numpy as np
import numpy.typing as npt

from .exceptions import SplurgeDcfDataError, SplurgeDcfLookupError, SplurgeDcfTypeError, SplurgeDcfValueError

E = TypeVar("E", bound=Enum)


def derive_seed(master: int, *path: int) -> int:
    """Derive a 32-bit child seed from a master seed and an integer path.

    The same ``(master, *path)`` always yields the same seed, and distinct paths
    yield statistically independent streams. The cascade uses paths such as
    ``(level, slot)`` so any filter bank or forest can be rebuilt in isolation.

    Args:
        master (int): Master seed (non-negative).
        *path (int): Non-negative integers identifying the component.

    Returns:
        int: Child seed in ``[0, 2**32)``.

    Raises:
        SplurgeDcfValueError: If the master seed or any path element is negative.
    """
    entropy = [master, *path]
    if any(value < 0 for value in entropy):
        raise SplurgeDcfValueError(
            message="Seeds and seed path elements must be non-negative",
            details={"param": "seed", "value": str(entropy)},
        )
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint32)[0])


def ensure_minimum_rows(
    matrix: npt.NDArray[np.float64],
    min_rows: int,
    *,
    fill_value: float = 0.0,
) -> npt.NDArray[np.float64]:
    """Ensure a 2-D matrix has at least ``min_rows`` rows.

    Args:
        matrix (NDArray): Matrix of shape ``(n, d)``.
        min_rows (int): Minimum number of rows required.
        fill_value (float): Value used for the appended rows.

    Returns:
        NDArray: ``matrix`` itself when it is tall enough, otherwise a new matrix
        with ``fill_value`` rows appended.
    """
    rows = matrix.shape[0]
    if rows >= min_rows:
        return matrix

    padding = np.full((min_rows - rows, matrix.shape[1]), fill_value, dtype=matrix.dtype)
    return np.vstack([matrix, padding])


def atomic_write_bytes(path: str | os.PathLike[str], data: bytes) -> Path:
    """Write bytes to ``path`` so readers never observe a partial file.

    The payload is written to a temporary file in the destination directory and
    moved into place with :func:`os.replace`. The temporary file is removed if
    anything fails.

    Args:
        path (str | PathLike): Destination path.
        data (bytes): Payload to write.

    Returns:
        Path: The destination path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return target


def atomic_write_text(path: str | os.PathLike[str], text: str, *, encoding: str = "utf-8") -> Path:
    """Write text to ``path`` atomically.

    Args:
        path (str | PathLike): Destination path.
        text (str): Text to write.
        encoding (str): Text encoding.

    Returns:
        Path: The destination path.
    """
    return atomic_write_bytes(path, text.encode(encoding))


def read_word_list(path: str | os.PathLike[str] | None, *, packaged: str) -> frozenset[str]:
    """Read a one-word-per-line list, skipping blank lines and ``#`` comments.

    Args:
        path (str | PathLike | None): User-supplied file; None reads the
            packaged resource instead.
        packaged (str): File name under ``splurge_dcf/data``.

    Returns:
        frozenset[str]: Lower-cased, stripped entries.

    Raises:
        SplurgeDcfDataError: If the file is missing or not valid UTF-8.
    """
    try:
        if path is None:
            text = resources.files("splurge_dcf.data").joinpath(packaged).read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise SplurgeDcfDataError(
            message=f"Word list not found: {path if path is not None else packaged}",
            error_code="file-not-found",
            details={"path": str(path if path is not None else packaged)},
        ) from e
    except (OSError, UnicodeDecodeError) as e:
        raise SplurgeDcfDataError(
            message=f"Cannot read word list {path}: {e}",
            details={"path": str(path)},
        ) from e

    entries = (line.strip().lower() for line in text.splitlines())
    return frozenset(entry for entry in entries if entry and not entry.startswith("#"))


def is_empty_or_none(value: Any, *, trim: bool = True) -> bool:
    """Check if a value is None, empty, or contains only whitespace.

    Args:
        value (Any): Value to check.
        trim (bool): Whether to trim whitespace before checking.

    Returns:
        bool: True if value is empty, None, or whitespace-only.
    """
    if value is None:
        return True

    if not isinstance(value, str):
        return False

    return not value.strip() if trim else not value


def to_enum(enum_cls: type[E], value: E | str, *, param: str) -> E:
    """Convert a member or its string value to an enumeration member.

    Args:
        enum_cls (type[Enum]): Target enumeration class.
        value (Enum | str): Member or member value (case-insensitive).
        param (str): Parameter name used in the error details.

    Returns:
        Enum: The matching member.

    Raises:
        SplurgeDcfTypeError: If ``value`` is neither a member nor a string.
        SplurgeDcfLookupError: If ``value`` names no member.
    """
    if isinstance(value, enum_cls):
        return value
    if not isinstance(value, str):
        raise SplurgeDcfTypeError(
            message=f"{param} must be a {enum_cls.__name__} or a string, got {type(value).__name__}",
            details={"param": param, "value": repr(value)},
        )
    text = str(value).strip().lower()
    for member in enum_cls:
        if member.value == text:
            return member
    raise SplurgeDcfLookupError(
        message=f"Unknown {param} '{value}'",
        details={"param": param, "value": str(value), "choices": ",".join(m.value for m in enum_cls)},
    )
