# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Entrypoint for CLI."""

from __future__ import annotations

import logging
import sys

from .cli_utils import COMMANDS, get_parsed_args
from .errors import MwcnnError


def main(argv: list[str] | None = None) -> None:
    """Entrypoint for CLI application."""

    args = get_parsed_args(argv)

    log_level = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=log_level, format="%(levelname)s: %(message)s")

    logging.debug("Command: %s", args.command)

    try:
        code = COMMANDS[args.command](args)
    except (MwcnnError, ValueError, OSError) as exc:
        logging.error("%s", exc)
        code = 1

    sys.exit(code)  # 0 indicates success


if __name__ == "__main__":
    main()
