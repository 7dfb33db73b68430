"""Module entry-point to run the splurge-dcf CLI.

This module allows running the package as a script using:

    python -m splurge_dcf

It simply forwards execution to :func:`splurge_dcf.cli.main`.
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
