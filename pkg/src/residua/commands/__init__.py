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
import time
from abc import ABC, abstractmethod
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from typing import Any, Dict, List, Optional, Tuple

from transformers.utils import logging

from ..models.configuration_residua import ResiduaConfig
from ..modules.chain import OrderedPovm
from ..utils.documents import PovmDocument, dump


logger = logging.get_logger(__name__)

PASS = "pass"
FAIL = "fail"


def nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 0:
        raise ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


class Report:
    """
    Machine readable outcome of one command: the command echo, one record per check, summary counts and the wall clock.
    """

    def __init__(self, command: str, arguments: Dict[str, Any]):
        self.command = command
        self.arguments = arguments
        self.checks: List[Dict[str, Any]] = []
        self.outputs: Dict[str, Any] = {}
        self._start = time.perf_counter()

    def add_check(self, name: str, value, threshold=None, passed: Optional[bool] = None) -> bool:
        if passed is None:
            passed = value <= threshold
        self.checks.append(
            {
                "name": name,
                "status": PASS if passed else FAIL,
                "value": value,
                "threshold": threshold,
            }
        )
        if not passed:
            logger.warning(f"check {name} failed: value {value} against threshold {threshold}")
        return passed

    @property
    def failed(self) -> int:
        return sum(check["status"] == FAIL for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "command": {"name": self.command, "arguments": self.arguments},
            "checks": self.checks,
            "summary": {"total": len(self.checks), "passed": len(self.checks) - self.failed, "failed": self.failed},
        }
        if self.outputs:
            record["outputs"] = self.outputs
        record["wall_clock"] = time.perf_counter() - self._start
        return record


class BaseResiduaCLICommand(ABC):
    @staticmethod
    @abstractmethod
    def register_subcommand(parser: ArgumentParser):
        raise NotImplementedError()

    @abstractmethod
    def run(self) -> int:
        raise NotImplementedError()

    @staticmethod
    def add_common_arguments(parser: ArgumentParser, with_input: bool = True):
        if with_input:
            parser.add_argument("document", type=str, help="Path to the input POVM document.")
        parser.add_argument("--out", type=str, default=None, help="Write the report to this path instead of stdout.")
        parser.add_argument("--verbose", action="store_true", help="Log progress at info level.")

    def __init__(self, args: Namespace):
        self.args = args

    def arguments(self) -> Dict[str, Any]:
        return {key: value for key, value in sorted(vars(self.args).items()) if key != "func"}

    def load(self, path: Optional[str] = None) -> Tuple[OrderedPovm, ResiduaConfig, PovmDocument]:
        """Read a POVM document, applying its tolerance overrides on top of the environment defaults."""
        document = PovmDocument.read(path if path is not None else self.args.document)
        config = ResiduaConfig().with_overrides(document.tolerances)
        return document.to_povm(config.check_tol, config.hermitian_tol), config, document

    def finish(self, report: Report) -> int:
        text = dump(report.to_dict(), self.args.out)
        if self.args.out is None:
            sys.stdout.write(text)
        return report.exit_code

    @staticmethod
    def add_emit_argument(parser: ArgumentParser):
        parser.add_argument("--emit", type=str, default=None, help="Also write the resulting POVM document here.")

    def emit(self, report: Report, povm: OrderedPovm) -> None:
        document = PovmDocument.from_povm(povm)
        report.outputs["document"] = document.to_dict()
        if self.args.emit is not None:
            document.write(self.args.emit)
