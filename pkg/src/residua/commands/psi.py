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

from ..models.modeling_transform import iterate_psi
from . import BaseResiduaCLICommand, Report, nonnegative_int


def psi_command_factory(args):
    return PsiCommand(args)


class PsiCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        psi_parser = parser.add_parser("psi", help="Iterate the residual transform on a POVM document.")
        BaseResiduaCLICommand.add_common_arguments(psi_parser)
        BaseResiduaCLICommand.add_emit_argument(psi_parser)
        psi_parser.add_argument("--steps", type=nonnegative_int, required=True, help="Maximal number of applications.")
        psi_parser.add_argument(
            "--fold-terminals",
            action="store_true",
            help="Keep a single terminal coordinate instead of one per application.",
        )
        psi_parser.set_defaults(func=psi_command_factory)

    def run(self) -> int:
        p, config, _ = self.load()
        iterate, convergence = iterate_psi(
            p, m_max=self.args.steps, config=config, track_terminals=not self.args.fold_terminals
        )
        report = Report("psi", self.arguments())
        report.add_check("normalization", iterate.povm.normalization_residual(), config.check_tol)
        report.outputs["convergence"] = {
            "steps": convergence.steps,
            "converged": convergence.converged,
            "observed_ratio": convergence.observed_ratio,
            "final_distance": convergence.final_distance(),
            "distances": convergence.distances,
        }
        self.emit(report, iterate.povm)
        return self.finish(report)
