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

from transformers.utils import logging

from ..models.modeling_collapse import collapse_map
from ..models.modeling_postcollapse import decay_check, psi_on_collapsed_equivalence
from ..modules.linalg import max_eigenvalue
from ..modules.polynomials import poly_family
from . import BaseResiduaCLICommand, Report, nonnegative_int


logger = logging.get_logger(__name__)

DECAY_COORDINATES = 3


def postcollapse_command_factory(args):
    return PostcollapseCommand(args)


class PostcollapseCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        postcollapse_parser = parser.add_parser(
            "postcollapse", help="Compare the transform after collapse with the polynomial family of the escape."
        )
        BaseResiduaCLICommand.add_common_arguments(postcollapse_parser)
        postcollapse_parser.add_argument(
            "--levels", type=nonnegative_int, required=True, help="Highest level to compare."
        )
        postcollapse_parser.set_defaults(func=postcollapse_command_factory)

    def run(self) -> int:
        p, config, _ = self.load()
        b = collapse_map(p, config)
        report = Report("postcollapse", self.arguments())

        families = {}
        for m in range(self.args.levels + 1):
            equivalence = psi_on_collapsed_equivalence(b, m, config)
            report.add_check(f"two_paths[{m}]", equivalence.max_distance, config.check_tol)
            families[str(m)] = [poly_family(m, config=config).coefficients(j) for j in range(1, m + 2)]

        if max_eigenvalue(b.b_esc) < 1.0 - config.kernel_tol:
            for j in range(1, min(DECAY_COORDINATES, self.args.levels) + 1):
                decay = decay_check(b.b_esc, j, self.args.levels, config)
                report.add_check(f"decay[{j}]", decay.holds, passed=decay.holds)
        else:
            logger.info("escape effect has an eigenvalue at 1, skipping the decay envelope")

        report.outputs["families"] = families
        return self.finish(report)
