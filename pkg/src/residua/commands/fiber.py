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
from argparse import ArgumentParser

from ..models.modeling_collapse import CollapsedPovm, fiber_membership
from . import BaseResiduaCLICommand, Report


def fiber_command_factory(args):
    return FiberCommand(args)


class FiberCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        fiber_parser = parser.add_parser("fiber", help="Test whether a POVM document lies in the fiber of a collapsed one.")
        BaseResiduaCLICommand.add_common_arguments(fiber_parser)
        fiber_parser.add_argument(
            "--against", type=str, required=True, help="Collapsed POVM document, the escape as its terminal coordinate."
        )
        fiber_parser.set_defaults(func=fiber_command_factory)

    def run(self) -> int:
        p, config, _ = self.load()
        target, _, _ = self.load(self.args.against)
        b = CollapsedPovm.from_povm(target, config.tolerances)
        fiber = fiber_membership(p, b, config)

        report = Report("fiber", self.arguments())
        report.add_check("kernel_levels", max(fiber.kernel_distances), config.check_tol)
        report.add_check("compression_levels", max(fiber.compression_distances), config.check_tol)
        report.add_check("collapse_agrees", fiber.collapse_agrees, passed=fiber.collapse_agrees)
        return self.finish(report)
