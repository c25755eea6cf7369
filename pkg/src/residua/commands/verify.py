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

from ..models.modeling_collapse import collapse_map, fiber_membership, is_collapsed
from ..models.modeling_dilation import compression_defect, dilation_identities, residual_isometry
from ..models.modeling_transform import (
    is_pvm_fixed_point,
    iterate_psi,
    psi,
    second_coordinate_law,
)
from ..modules.chain import recover_contractions, run_chain
from ..modules.linalg import frobenius, is_projection_valued
from ..utils.errors import FactorizationViolationError, IsometryViolationError, RankIdentityViolationError
from . import BaseResiduaCLICommand, Report, nonnegative_int
from .dilate import dilation_of


logger = logging.get_logger(__name__)

LAW_STEPS = 5
CONVERGENCE_THRESHOLD = 1e-6


def verify_command_factory(args):
    return VerifyCommand(args)


class VerifyCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        verify_parser = parser.add_parser("verify", help="Run the invariant suite on a POVM document.")
        BaseResiduaCLICommand.add_common_arguments(verify_parser)
        verify_parser.add_argument(
            "--steps",
            type=nonnegative_int,
            default=None,
            help="Iteration budget of the convergence check (config default).",
        )
        verify_parser.set_defaults(func=verify_command_factory)

    def run(self) -> int:
        p, config, _ = self.load()
        tol = config.tolerances
        report = Report("verify", self.arguments())
        report.add_check("normalization", p.normalization_residual(), tol.check_tol)

        try:
            drivers = recover_contractions(p, tol, factorization_tol=config.factorization_tol)
            chain = run_chain(drivers, tol, effect_tol=config.effect_tol, hermitian_tol=config.hermitian_tol)
            rebuilt = max(frobenius(t - e) for t, e in zip(chain.extracted, p.effects))
            report.add_check("factorization", rebuilt, config.factorization_tol)
        except FactorizationViolationError as e:
            logger.warning(str(e))
            report.add_check("factorization", False, passed=False)
            return self.finish(report)

        dil = dilation_of(drivers, config)
        identities = dilation_identities(dil)
        report.add_check("dilation_isometry", identities.isometry_residual, tol.check_tol)
        report.add_check("dilation_extracted", max(identities.extracted_residuals), tol.check_tol)
        report.add_check("dilation_residual", max(identities.residual_residuals), tol.check_tol)

        for n in range(1, dil.num_blocks + 1):
            try:
                compression_defect(dil, n, config)
                report.add_check(f"rank_identity[{n}]", True, passed=True)
            except RankIdentityViolationError as e:
                logger.warning(str(e))
                report.add_check(f"rank_identity[{n}]", False, passed=False)
            try:
                isometry = residual_isometry(dil, dil.chain, n, config)
                report.add_check(f"residual_isometry[{n}]", isometry.max_residual(), tol.check_tol)
            except IsometryViolationError as e:
                logger.warning(str(e))
                report.add_check(f"residual_isometry[{n}]", False, passed=False)

        report.add_check("psi_normalization", psi(p, config).normalization_residual(), tol.check_tol)
        fixed = is_pvm_fixed_point(p, config)
        report.add_check("psi_fixed_point", fixed, passed=fixed == is_projection_valued(p.effects, tol))

        if len(p.originals()) >= 2:
            current, worst = p, 0.0
            for m in range(1, LAW_STEPS + 1):
                current = psi(current, config)
                worst = max(worst, frobenius(current.originals()[1] - second_coordinate_law(p, m)))
            report.add_check("second_coordinate_law", worst, tol.check_tol)

        b = collapse_map(p, config)
        check = is_collapsed(b, config)
        report.add_check("collapsed", check.is_collapsed, passed=bool(check.is_collapsed))
        report.add_check("escape_identity", check.escape_identity_residual, tol.check_tol)
        member = fiber_membership(p, b, config).is_member
        report.add_check("fiber_membership", member, passed=member)

        _, convergence = iterate_psi(p, m_max=self.args.steps, config=config, track_terminals=False)
        report.add_check("convergence", convergence.final_distance(), CONVERGENCE_THRESHOLD)
        report.outputs["convergence"] = {
            "steps": convergence.steps,
            "converged": convergence.converged,
            "observed_ratio": convergence.observed_ratio,
        }
        return self.finish(report)
