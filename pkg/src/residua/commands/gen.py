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

from ..models.configuration_residua import ResiduaConfig
from ..models.modeling_collapse import CollapsedPovm, is_collapsed
from ..models.modeling_transform import is_pvm_fixed_point
from ..modules.generators import GenKind, GenSpec, gen
from ..modules.linalg import frobenius
from . import BaseResiduaCLICommand, Report


COMMUTATOR_TOL = 1e-12


def gen_command_factory(args):
    return GenCommand(args)


class GenCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        gen_parser = parser.add_parser("gen", help="Generate a seeded random instance.")
        BaseResiduaCLICommand.add_common_arguments(gen_parser, with_input=False)
        BaseResiduaCLICommand.add_emit_argument(gen_parser)
        gen_parser.add_argument("--kind", type=str, required=True, choices=[kind.value for kind in GenKind])
        gen_parser.add_argument("--dim", type=int, required=True)
        gen_parser.add_argument("--n", type=int, required=True, help="Number of effects.")
        gen_parser.add_argument("--seed", type=int, required=True)
        gen_parser.set_defaults(func=gen_command_factory)

    def run(self) -> int:
        config = ResiduaConfig()
        spec = GenSpec(dim=self.args.dim, n_effects=self.args.n, kind=self.args.kind, seed=self.args.seed)
        instance = gen(spec, config)
        report = Report("gen", self.arguments())

        if isinstance(instance, CollapsedPovm):
            check = is_collapsed(instance, config)
            report.add_check("collapsed", check.is_collapsed, passed=bool(check.is_collapsed))
            povm = instance.to_povm(config.check_tol)
        else:
            povm = instance
        report.add_check("normalization", povm.normalization_residual(), config.check_tol)
        if spec.kind == GenKind.PVM:
            fixed = is_pvm_fixed_point(povm, config)
            report.add_check("psi_fixed_point", fixed, passed=fixed)
        if spec.kind == GenKind.COMMUTING:
            worst = max(
                (frobenius(a @ b - b @ a) for a in povm.effects for b in povm.effects),
                default=0.0,
            )
            report.add_check("commutators", worst, COMMUTATOR_TOL)

        self.emit(report, povm)
        return self.finish(report)
