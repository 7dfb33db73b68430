"""Custom exception classes for splurge-dcf package.

This module defines the exception hierarchy used throughout the package. Every
error carries a hierarchical domain (``splurge-dcf.data``, ``splurge-dcf.model``
and so on) so callers and the CLI can branch on the failure category without
parsing messages.

Copyright (c) 2025 Jim Schilling

Please preserve this header and all related material when sharing!

This module is licensed under the MIT License.
"""

from __future__ import annotations

from splurge_exceptions import SplurgeFrameworkError


class SplurgeDcfError(SplurgeFrameworkError):
    """Base exception for all splurge-dcf errors.

    Catch this class to handle any error raised by the package with a single
    except clause.
    """

    _domain = "splurge-dcf"


class SplurgeDcfTypeError(SplurgeDcfError):
    """Exception raised when an argument has the wrong type or shape kind."""

    _domain = "splurge-dcf.type"


class SplurgeDcfValueError(SplurgeDcfError):
    """Exception raised for invalid or out-of-range values.

    Raised for violated preconditions such as non-positive dimensions, split
    ratios that do not sum to one, or single-class training data.
    """

    _domain = "splurge-dcf.value"


class SplurgeDcfLookupError(SplurgeDcfValueError):
    """Exception raised for unknown keys or names.

    Raised when a configuration key is not recognised or an enumeration name
    does not match any known member.
    """

    _domain = "splurge-dcf.lookup"


class SplurgeDcfDataError(SplurgeDcfError):
    """Exception raised for unreadable or malformed input files.

    Covers the labeled message file, embedding vector files, wordlists and
    configuration files.
    """

    _domain = "splurge-dcf.data"


class SplurgeDcfModelError(SplurgeDcfError):
    """Exception raised for unreadable, corrupt or incompatible model files."""

    _domain = "splurge-dcf.model"
