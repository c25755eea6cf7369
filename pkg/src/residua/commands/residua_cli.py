# coding=utf-8
# Copyright 2025 Jingze Shi. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import sys
from argparse import ArgumentParser
from typing import List, Optional

from transformers.utils import logging

from ..utils.errors import ResiduaError
from .collapse import CollapseCommand
from .couple import CoupleCommand
from .dilate import DilateCommand
from .fiber import FiberCommand
from .gen import GenCommand
from .postcollapse import PostcollapseCommand
from .psi import PsiCommand
from .verify import VerifyCommand


logger = logging.get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2


def main(argv: Optional[List[str]] = None) -> int:
    parser = ArgumentParser("Residua CLI tool", usage="residua <command> [<args>]")
    commands_parser = parser.add_subparsers(help="residua command helpers")

    # Register commands
    VerifyCommand.register_subcommand(commands_parser)
    PsiCommand.register_subcommand(commands_parser)
    CollapseCommand.register_subcommand(commands_parser)
    DilateCommand.register_subcommand(commands_parser)
    FiberCommand.register_subcommand(commands_parser)
    CoupleCommand.register_subcommand(commands_parser)
    PostcollapseCommand.register_subcommand(commands_parser)
    GenCommand.register_subcommand(commands_parser)

    # Let's go
    args = parser.parse_args(argv)

    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_INVALID_INPUT

    if args.verbose:
        logging.set_verbosity_info()

    # Run
    service = args.func(args)
    try:
        return service.run()
    except ResiduaError as e:
        print(f"residua {args.func.__name__.replace('_command_factory', '')}: error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
