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

from ..models.modeling_collapse import CollapsedPovm, CouplingSpec, couple_fiber, fiber_membership
from ..utils.documents import MatrixDocument
from ..utils.errors import DimensionMismatchError
from . import BaseResiduaCLICommand, Report


def couple_command_factory(args):
    return CoupleCommand(args)


class CoupleCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        couple_parser = parser.add_parser(
            "couple", help="Build a fiber member of a collapsed POVM document that couples its first two sectors."
        )
        BaseResiduaCLICommand.add_common_arguments(couple_parser)
        BaseResiduaCLICommand.add_emit_argument(couple_parser)
        couple_parser.add_argument("--c", type=str, required=True, help="Matrix document of the block on the first sector.")
        couple_parser.add_argument("--x", type=str, required=True, help="Matrix document of the coupling block.")
        couple_parser.set_defaults(func=couple_command_factory)

    def run(self) -> int:
        target, config, _ = self.load()
        b = CollapsedPovm.from_povm(target, config.tolerances)
        c, x = MatrixDocument.read(self.args.c), MatrixDocument.read(self.args.x)
        if c.dim != b.dim or x.dim != b.dim:
            raise DimensionMismatchError(f"coupling blocks of dimensions {c.dim} and {x.dim} for a POVM on C^{b.dim}")
        p = couple_fiber(b, CouplingSpec(c.matrix, x.matrix), config)

        report = Report("couple", self.arguments())
        report.add_check("normalization", p.normalization_residual(), config.check_tol)
        fiber = fiber_membership(p, b, config)
        report.add_check("fiber_membership", fiber.is_member, passed=fiber.is_member)
        self.emit(report, p)
        return self.finish(report)
