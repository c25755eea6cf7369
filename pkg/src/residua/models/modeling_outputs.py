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
"""Structured outputs of the residua operators."""

from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import torch

from transformers.utils import ModelOutput


@dataclass
class DilationReport(ModelOutput):
    """
    Residuals of the three dilation identities.

    Args:
        isometry_residual (`float`):
            Frobenius norm of `v^H v - I`.
        extracted_residuals (`List[float]`):
            Per block, Frobenius norm of `v^H P_n v - T_n`.
        residual_residuals (`List[float]`):
            Per block, Frobenius norm of `v^H Q_n v - R_n`.
        block_sizes (`List[int]`):
            Dimensions of the blocks `K_n`.
        k_dim (`int`):
            Dimension of the dilation space.
    """

    isometry_residual: float = None
    extracted_residuals: List[float] = None
    residual_residuals: List[float] = None
    block_sizes: List[int] = None
    k_dim: int = None


@dataclass
class CompressionReport(ModelOutput):
    """
    Compression of a coordinate projection to a tail subspace and its rank identity.

    Args:
        c (`torch.Tensor`):
            Matrix of the compression in the basis of the tail subspace.
        defect (`torch.Tensor`):
            `c - c^2`.
        defect_rank (`int`):
            Numerical rank of the defect.
        dim_m_next (`int`):
            Dimension of the next tail subspace.
        dim_intersection (`int`):
            Dimension of the intersection of the tail subspace with the coordinate tail.
    """

    c: torch.Tensor = None
    defect: torch.Tensor = None
    defect_rank: int = None
    dim_m_next: int = None
    dim_intersection: int = None


@dataclass
class BlockDecomposition(ModelOutput):
    """
    Args:
        diagonal_terms (`List[torch.Tensor]`):
            One-coordinate contributions, one per block of the range.
        offdiag (`torch.Tensor`):
            Sum of the interaction terms between distinct blocks.
        residual (`float`):
            Frobenius norm of `sum(diagonal_terms) + offdiag - defect`.
        max_interaction (`float`):
            Largest Frobenius norm of a single interaction term.
        additive_rank (`int`, *optional*):
            Rank of `sum_j (C_j - C_j^2)`, only set when every interaction term vanishes.
    """

    diagonal_terms: List[torch.Tensor] = None
    offdiag: torch.Tensor = None
    residual: float = None
    max_interaction: float = None
    additive_rank: Optional[int] = None


@dataclass
class IsometryReport(ModelOutput):
    """
    The residual isometry of one step and the residuals of the identities it satisfies.

    Args:
        u (`torch.Tensor` of shape `(k_dim, r)`):
            The isometry on an orthonormal basis of the support of the previous residual.
        support (`torch.Tensor` of shape `(h_dim, r)`):
            That orthonormal basis.
        support_rank (`int`):
            `r`, fixed by `kernel_tol`.
        isometry_residual (`float`):
            Frobenius norm of `u^H u - I`.
        driver_residual (`float`):
            Compressed driver against `u^H P_n u`.
        complement_residual (`float`):
            Compressed complement of the driver against `u^H Q_n u`.
        extracted_residual (`float`):
            Reconstruction of `T_n` through `u`.
        residual_residual (`float`):
            Reconstruction of `R_n` through `u`.
    """

    u: torch.Tensor = None
    support: torch.Tensor = None
    support_rank: int = None
    isometry_residual: float = None
    driver_residual: float = None
    complement_residual: float = None
    extracted_residual: float = None
    residual_residual: float = None

    def max_residual(self) -> float:
        return max(
            self.isometry_residual,
            self.driver_residual,
            self.complement_residual,
            self.extracted_residual,
            self.residual_residual,
        )


@dataclass
class PsiIterate(ModelOutput):
    """
    Args:
        povm (`OrderedPovm`):
            The iterate, originals first and terminals in creation order.
        step (`int`):
            Number of applications of the residual transform.
    """

    povm: Any = None
    step: int = None


@dataclass
class GapReport(ModelOutput):
    """
    Args:
        epsilons (`List[float]`):
            `epsilon_r` for `r = 2, ..., k`.
        predicted_rho (`float`):
            `max_r sqrt(1 - epsilon_r)`, 0 when there are no levels.
        gap_holds (`bool`):
            Whether every `epsilon_r` exceeds `rank_tol`.
    """

    epsilons: List[float] = None
    predicted_rho: float = None
    gap_holds: bool = None


@dataclass
class ConvergenceReport(ModelOutput):
    """
    Args:
        distances (`List[List[float]]`):
            For each step `m`, the Frobenius distance of every original coordinate to its collapse target.
        converged (`bool`):
            Whether the last step moved the originals by at most `conv_tol`.
        observed_ratio (`float`, *optional*):
            Geometric mean of the step ratios of the largest distance over the trailing window.
        steps (`int`):
            Number of applications performed.
    """

    distances: List[List[float]] = None
    converged: bool = None
    observed_ratio: Optional[float] = None
    steps: int = None

    def final_distance(self) -> float:
        return max(self.distances[-1], default=0.0)


@dataclass
class CollapseCheck(ModelOutput):
    """
    Args:
        is_collapsed (`bool`):
            Whether the candidate satisfies orthogonality and the support condition.
        worst_pair (`Tuple[int, int]`, *optional*):
            1-based coordinates of the largest product `B_i B_j`, `i < j`.
        worst_product (`float`):
            Frobenius norm of that product.
        support_defect (`float`):
            Frobenius norm of `sum_k S_k - I`.
        escape_identity_residual (`float`):
            Largest Frobenius norm of `B_k B_esc - (B_k - B_k^2)`.
    """

    is_collapsed: bool = None
    worst_pair: Optional[Tuple[int, int]] = None
    worst_product: float = None
    support_defect: float = None
    escape_identity_residual: float = None


@dataclass
class FiberReport(ModelOutput):
    """
    Args:
        is_member (`bool`):
            Whether both level conditions hold at every level.
        kernel_distances (`List[float]`):
            Per level `k`, distance between the joint kernel of the earlier originals and `E_{k-1}`.
        compression_distances (`List[float]`):
            Per level `k`, Frobenius distance between the compression of `A_k` to `E_{k-1}` and `B_k`.
        collapse_agrees (`bool`):
            Whether the collapse of the candidate equals the collapsed POVM.
    """

    is_member: bool = None
    kernel_distances: List[float] = None
    compression_distances: List[float] = None
    collapse_agrees: bool = None


@dataclass
class EquivalenceReport(ModelOutput):
    """
    Args:
        max_distance (`float`):
            Largest coordinatewise Frobenius distance between the two paths.
        distances (`List[float]`):
            Coordinatewise distances, originals first.
        generic (`List[torch.Tensor]`):
            Coordinates produced by iterating the residual transform.
        polynomial (`List[torch.Tensor]`):
            Coordinates produced by the polynomial family.
    """

    max_distance: float = None
    distances: List[float] = None
    generic: List[torch.Tensor] = None
    polynomial: List[torch.Tensor] = None


@dataclass
class DecayReport(ModelOutput):
    """
    Args:
        holds (`bool`):
            Whether the envelope and mass conservation hold at every level.
        rho (`float`):
            Largest eigenvalue of the effect.
        norms (`List[float]`):
            `||p_{m,j}(e)||` for `m = j, ..., m_max`.
        envelopes (`List[float]`):
            `rho^{m-j+1} ||p_{j-1,j}(e)||` for the same levels.
        mass_residuals (`List[float]`):
            `||sum_i p_{m,i}(e) - e||` for the same levels.
    """

    holds: bool = None
    rho: float = None
    norms: List[float] = None
    envelopes: List[float] = None
    mass_residuals: List[float] = None
