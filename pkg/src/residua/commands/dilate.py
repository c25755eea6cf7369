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
from typing import List

import torch

from transformers.utils import logging

from ..models.configuration_residua import ResiduaConfig
from ..models.modeling_dilation import (
    NaimarkDilation,
    build_dilation,
    compression_defect,
    dilation_identities,
    memory_profile,
)
from ..modules.chain import recover_contractions
from ..modules.linalg import identity, numerical_rank
from ..utils.documents import PovmDocument
from ..utils.errors import ChainNotExhaustiveError, RankIdentityViolationError
from . import BaseResiduaCLICommand, Report


logger = logging.get_logger(__name__)


def dilation_of(drivers: List[torch.Tensor], config: ResiduaConfig) -> NaimarkDilation:
    """Dilate a chain, closing it with an identity driver when its final residual is not zero."""
    try:
        return build_dilation(drivers, config)
    except ChainNotExhaustiveError:
        logger.info("chain is not exhaustive, appending an identity driver")
        return build_dilation(list(drivers) + [identity(drivers[0].shape[0])], config)


def dilate_command_factory(args):
    return DilateCommand(args)


class DilateCommand(BaseResiduaCLICommand):
    @staticmethod
    def register_subcommand(parser: ArgumentParser):
        dilate_parser = parser.add_parser("dilate", help="Summarize the minimal dilation of a POVM document.")
        BaseResiduaCLICommand.add_common_arguments(dilate_parser)
        dilate_parser.add_argument(
            "--as-drivers",
            action="store_true",
            help="Read the effects as driving contractions instead of recovering them from the POVM.",
        )
        dilate_parser.set_defaults(func=dilate_command_factory)

    def run(self) -> int:
        if self.args.as_drivers:
            document = PovmDocument.read(self.args.document)
            config = ResiduaConfig().with_overrides(document.tolerances)
            drivers = document.effects
        else:
            p, config, _ = self.load()
            drivers = recover_contractions(p, config.tolerances, factorization_tol=config.factorization_tol)
        tol = config.tolerances

        dil = dilation_of(drivers, config)
        report = Report("dilate", self.arguments())
        identities = dilation_identities(dil)
        report.add_check("isometry", identities.isometry_residual, tol.check_tol)
        report.add_check("extracted", max(identities.extracted_residuals), tol.check_tol)
        report.add_check("residual", max(identities.residual_residuals), tol.check_tol)

        ranks = sum(numerical_rank(t, tol) for t in dil.chain.extracted)
        report.add_check("minimal_dimension", dil.k_dim, ranks, passed=dil.k_dim == ranks)

        steps = []
        for n in range(1, dil.num_blocks + 1):
            try:
                compression = compression_defect(dil, n, config)
            except RankIdentityViolationError as e:
                logger.warning(str(e))
                report.add_check(f"rank_identity[{n}]", False, passed=False)
                continue
            report.add_check(f"rank_identity[{n}]", True, passed=True)
            steps.append(
                {
                    "step": n,
                    "defect_rank": compression.defect_rank,
                    "dim_m_next": compression.dim_m_next,
                    "dim_intersection": compression.dim_intersection,
                }
            )

        report.outputs = {
            "k_dim": dil.k_dim,
            "block_sizes": dil.block_sizes,
            "memory_profile": memory_profile(dil, config),
            "rank_identities": steps,
        }
        return self.finish(report)
