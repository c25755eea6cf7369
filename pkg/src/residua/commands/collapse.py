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

from ..models.modeling_collapse import collapse_map, fiber_membership, is_collapsed
from . import BaseResiduaCLICommand, Report


def collapse_command_factory(args):
    return CollapseCommand(args)


class CollapseCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        collapse_parser = parser.add_parser("collapse", help="Collapse a POVM document.")
        BaseResiduaCLICommand.add_common_arguments(collapse_parser)
        BaseResiduaCLICommand.add_emit_argument(collapse_parser)
        collapse_parser.set_defaults(func=collapse_command_factory)

    def run(self) -> int:
        p, config, _ = self.load()
        b = collapse_map(p, config)
        check = is_collapsed(b, config)

        report = Report("collapse", self.arguments())
        report.add_check("orthogonality", check.worst_product, config.check_tol)
        report.add_check("support", check.support_defect, config.check_tol)
        report.add_check("escape_identity", check.escape_identity_residual, config.check_tol)
        member = fiber_membership(p, b, config).is_member
        report.add_check("fiber_membership", member, passed=member)
        self.emit(report, b.to_povm(config.check_tol))
        return self.finish(report)
