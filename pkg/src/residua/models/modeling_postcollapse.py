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
"""Dynamics of the residual transform after collapse, driven by the escape effect alone."""

from typing import List, Optional

import torch

from transformers.utils import logging

from ..modules.linalg import as_effect, eigh, frobenius, max_eigenvalue, spectral_apply
from ..modules.polynomials import PolyFamily, evaluate_family, poly_family
from ..utils.errors import LevelTooLargeError, NotCollapsedError, SpectralMassAtOneError
from .configuration_residua import ResiduaConfig
from .modeling_collapse import CollapsedPovm, is_collapsed
from .modeling_outputs import DecayReport, EquivalenceReport
from .modeling_transform import ResidualTransform


logger = logging.get_logger(__name__)


def eval_on_effect(f: PolyFamily, e: torch.Tensor, config: Optional[ResiduaConfig] = None) -> List[torch.Tensor]:
    """
    Evaluate every polynomial of a family on an effect by functional calculus.

    Args:
        f (`PolyFamily`):
            The family, complete or truncated.
        e (`torch.Tensor`):
            An effect. Raises `NotEffectError` otherwise.
        config (`ResiduaConfig`, *optional*):
            Supplies `effect_tol` and `check_tol`.

    Returns:
        `List[torch.Tensor]`: `p_{m,1}(e), ..., p_{m,n}(e)`.
    """
    config = config if config is not None else ResiduaConfig()
    e = as_effect(e, config.effect_tol, config.hermitian_tol)
    stacked = spectral_apply(e, lambda values: f.values(values.clamp(0.0, 1.0)))
    outputs = [as_effect(x, config.effect_tol, config.hermitian_tol) for x in stacked]

    if f.complete:
        defect = frobenius(torch.stack(outputs).sum(0) - e)
        if defect > config.check_tol:
            logger.warning(f"level {f.level} values sum to the effect only within {defect:.3e}")
    return outputs


def psi_on_collapsed_equivalence(
    b: CollapsedPovm, m: int, config: Optional[ResiduaConfig] = None
) -> EquivalenceReport:
    """
    Compute `m` applications of the residual transform to a collapsed POVM twice: by running the transform on
    `(B_1, ..., B_N, B_esc)`, and by keeping `B_k` and replacing the escape with `p_{m,1}(B_esc), ..., p_{m,m+1}(B_esc)`.
    """
    config = config if config is not None else ResiduaConfig()
    check = is_collapsed(b, config)
    if not check.is_collapsed:
        raise NotCollapsedError(
            f"not collapsed: worst product {check.worst_product:.3e}, support defect {check.support_defect:.3e}"
        )
    family = poly_family(m, config=config)

    # a fixed number of applications, originals of a collapsed POVM never move
    transform = ResidualTransform(config)
    current = b.to_povm(config.check_tol)
    for _ in range(m):
        current = transform(current)
    generic = current.effects
    polynomial = b.b + eval_on_effect(family, b.b_esc, config)

    distances = [frobenius(x - y) for x, y in zip(generic, polynomial)]
    return EquivalenceReport(
        max_distance=max(distances),
        distances=distances,
        generic=generic,
        polynomial=polynomial,
    )


def decay_check(e: torch.Tensor, j: int, m_max: int, config: Optional[ResiduaConfig] = None) -> DecayReport:
    """
    Check that the `j`-th escape coordinate vanishes geometrically: `||p_{m,j}(e)|| <= rho^{m-j+1} ||p_{j-1,j}(e)||`
    with `rho` the largest eigenvalue of `e`, together with `sum_i p_{m,i}(e) = e`, for `j <= m <= m_max`.

    Norms are spectral norms, read off the eigenvalues since every value is a function of `e`.
    """
    config = config if config is not None else ResiduaConfig()
    e = as_effect(e, config.effect_tol, config.hermitian_tol)
    rho = max(max_eigenvalue(e), 0.0)
    if rho >= 1.0 - config.kernel_tol:
        raise SpectralMassAtOneError(f"largest eigenvalue {rho:.12f} is within {config.kernel_tol:.1e} of 1")
    if j < 1:
        raise ValueError(f"j must be at least 1, got {j}")
    if m_max < j:
        raise ValueError(f"m_max = {m_max} leaves no level m with {j} <= m")
    if m_max > config.poly_level_cap:
        raise LevelTooLargeError(f"level {m_max} is beyond the cap {config.poly_level_cap}")

    values = eigh(e)[0].clamp(0.0, 1.0)
    base = evaluate_family(j - 1, values, n_coords=j)[j - 1].abs().max().item()

    norms, envelopes, mass_residuals = [], [], []
    for m in range(j, m_max + 1):
        level = evaluate_family(m, values)
        norms.append(level[j - 1].abs().max().item())
        envelopes.append(rho ** (m - j + 1) * base)
        mass_residuals.append((level.sum(0) - values).abs().max().item())

    holds = all(n <= env + config.check_tol for n, env in zip(norms, envelopes)) and all(
        r <= config.check_tol for r in mass_residuals
    )
    return DecayReport(holds=holds, rho=rho, norms=norms, envelopes=envelopes, mass_residuals=mass_residuals)
