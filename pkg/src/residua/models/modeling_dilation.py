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
"""Minimal Naimark dilation of a residual chain and its tail-space geometry."""

from typing import List, Optional, Sequence, Tuple

import torch

from transformers.utils import logging

from ..modules.chain import ResidualChain, run_chain
from ..modules.linalg import (
    DTYPE,
    Subspace,
    compress,
    coordinate_subspace,
    eigh,
    frobenius,
    identity,
    intersect,
    numerical_rank,
    operator_norm,
    orthonormal_range,
    psd_sqrt,
    relative_threshold,
)
from ..utils.errors import (
    ChainNotExhaustiveError,
    IndexOutOfRangeError,
    IsometryViolationError,
    RankIdentityViolationError,
)
from .configuration_residua import ResiduaConfig
from .modeling_outputs import BlockDecomposition, CompressionReport, DilationReport, IsometryReport


logger = logging.get_logger(__name__)


class NaimarkDilation:
    """
    An isometry `v: C^d -> C^D` into a space split into consecutive coordinate blocks `K_1, ..., K_N`.
    The coordinate projection onto block `n` realizes `P_n`, the sum of the blocks after `n` realizes `Q_n`.

    Args:
        v (`torch.Tensor` of shape `(k_dim, h_dim)`):
            The isometry.
        blocks (`List[Tuple[int, int]]`):
            `(offset, size)` of every block, zero sizes allowed so that block indices follow the drivers.
        chain (`ResidualChain`, *optional*):
            The residual chain the dilation was built from.
    """

    def __init__(self, v: torch.Tensor, blocks: Sequence[Tuple[int, int]], chain: Optional[ResidualChain] = None):
        self.v = v
        self.blocks = list(blocks)
        self.chain = chain
        offset = 0
        for start, size in self.blocks:
            if start != offset or size < 0:
                raise ValueError(f"blocks {self.blocks} do not partition [0, {v.shape[0]})")
            offset += size
        if offset != v.shape[0]:
            raise ValueError(f"blocks cover {offset} rows but v has {v.shape[0]}")

    @property
    def h_dim(self) -> int:
        return self.v.shape[1]

    @property
    def k_dim(self) -> int:
        return self.v.shape[0]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> List[int]:
        return [size for _, size in self.blocks]

    def __repr__(self):
        return f"NaimarkDilation(h_dim={self.h_dim}, k_dim={self.k_dim}, block_sizes={self.block_sizes})"

    def _check_block(self, n: int, low: int = 1) -> None:
        if not low <= n <= self.num_blocks:
            raise IndexOutOfRangeError(f"block index {n} is not in {low}..{self.num_blocks}")

    def indices(self, n: int, m: Optional[int] = None) -> List[int]:
        """Row indices of the blocks `n..m` (1-based, inclusive)."""
        m = n if m is None else m
        if n > m:
            return []
        start = self.blocks[n - 1][0]
        stop = self.blocks[m - 1][0] + self.blocks[m - 1][1]
        return list(range(start, stop))

    def tail_indices(self, n: int) -> List[int]:
        """Row indices of the blocks after `n`, the range of `Q_n`."""
        if n == 0:
            return list(range(self.k_dim))
        return list(range(self.blocks[n - 1][0] + self.blocks[n - 1][1], self.k_dim))

    def mask(self, indices: Sequence[int]) -> torch.Tensor:
        diagonal = torch.zeros(self.k_dim, dtype=DTYPE)
        diagonal[list(indices)] = 1
        return torch.diag(diagonal)

    def block_projection(self, n: int, m: Optional[int] = None) -> torch.Tensor:
        self._check_block(n)
        if m is not None:
            self._check_block(m)
        return self.mask(self.indices(n, m))

    def tail_projection(self, n: int) -> torch.Tensor:
        self._check_block(n, low=0)
        return self.mask(self.tail_indices(n))


def build_dilation(drivers: Sequence[torch.Tensor], config: Optional[ResiduaConfig] = None) -> NaimarkDilation:
    """
    Build the minimal Naimark dilation `V h = (B_1 h, B_2 h, ...)` with `B_n = A_n^{1/2} R_{n-1}^{1/2}`.

    The rows of block `n` are the coordinates of `B_n h` in an orthonormal basis of the range of `B_n`, so
    `v^H P_n v = T_n` and `v^H Q_n v = R_n`. The chain must be exhaustive, append an identity driver otherwise.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    chain = run_chain(drivers, tol, effect_tol=config.effect_tol, hermitian_tol=config.hermitian_tol)

    leftover = operator_norm(chain.residuals[-1])
    if leftover > tol.check_tol:
        raise ChainNotExhaustiveError(
            f"final residual has norm {leftover:.3e} > {tol.check_tol:.1e}, append an identity driver"
        )

    rows, blocks, offset = [], [], 0
    for a, residual in zip(chain.drivers, chain.residuals[:-1]):
        b = psd_sqrt(a) @ psd_sqrt(residual)
        image = orthonormal_range(b, tol)
        rows.append(image.basis.mH @ b)
        blocks.append((offset, image.dim))
        offset += image.dim
    dilation = NaimarkDilation(torch.cat(rows, dim=0), blocks, chain=chain)

    report = dilation_identities(dilation)
    worst = max([report.isometry_residual] + report.extracted_residuals + report.residual_residuals)
    if worst > tol.check_tol:
        logger.warning(f"dilation identities hold only within {worst:.3e} > {tol.check_tol:.1e}")
    return dilation


def dilation_identities(dil: NaimarkDilation, chain: Optional[ResidualChain] = None) -> DilationReport:
    chain = chain if chain is not None else dil.chain
    v = dil.v
    extracted, residual = [], []
    for n in range(1, dil.num_blocks + 1):
        extracted.append(frobenius(v.mH @ dil.block_projection(n) @ v - chain.extracted[n - 1]))
        residual.append(frobenius(v.mH @ dil.tail_projection(n) @ v - chain.residuals[n]))
    return DilationReport(
        isometry_residual=frobenius(v.mH @ v - identity(dil.h_dim)),
        extracted_residuals=extracted,
        residual_residuals=residual,
        block_sizes=dil.block_sizes,
        k_dim=dil.k_dim,
    )


def tail_subspace(dil: NaimarkDilation, n: int, config: Optional[ResiduaConfig] = None) -> Subspace:
    """Orthonormal basis of `M_n`, the span of `Q_n v`."""
    config = config if config is not None else ResiduaConfig()
    if not 0 <= n <= dil.num_blocks:
        raise IndexOutOfRangeError(f"tail index {n} is not in 0..{dil.num_blocks}")
    return orthonormal_range(dil.tail_projection(n) @ dil.v, config.tolerances)


def _coordinate_tail(dil: NaimarkDilation, n: int) -> Subspace:
    return coordinate_subspace(dil.k_dim, dil.tail_indices(n))


def compression_defect(dil: NaimarkDilation, n: int, config: Optional[ResiduaConfig] = None) -> CompressionReport:
    """
    Compress `P_n` to `M_{n-1}` and check `dim M_n - dim(M_{n-1} & Q_n K) = rank(c - c^2)`.
    """
    config = config if config is not None else ResiduaConfig()
    report, _ = block_compression(dil, n, n, config=config)
    return report


def block_compression(
    dil: NaimarkDilation,
    n: int,
    m: int,
    config: Optional[ResiduaConfig] = None,
) -> Tuple[CompressionReport, BlockDecomposition]:
    """
    Compress `P_n + ... + P_m` to `M_{n-1}`, check the rank identity against `dim(M_m / (M_{n-1} & Q_m K))`
    and split the defect into one-block terms and the interaction between distinct blocks.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    if not 1 <= n <= m <= dil.num_blocks:
        raise IndexOutOfRangeError(f"block range [{n}, {m}] is not inside [1, {dil.num_blocks}]")

    memory = tail_subspace(dil, n - 1, config)
    c = compress(dil.block_projection(n, m), memory)
    defect = c - c @ c
    defect_rank = numerical_rank(defect, tol)
    dim_m_next = tail_subspace(dil, m, config).dim
    dim_intersection = intersect(memory, _coordinate_tail(dil, m), tol).dim
    if dim_m_next - dim_intersection != defect_rank:
        raise RankIdentityViolationError(
            f"blocks [{n}, {m}]: dim M_{m} - dim intersection = {dim_m_next} - {dim_intersection} "
            f"but the defect has rank {defect_rank}"
        )

    basis = memory.basis
    complement = identity(dil.k_dim) - memory.projection()
    projections = [dil.block_projection(j) for j in range(n, m + 1)]
    diagonal_terms = [basis.mH @ p @ complement @ p @ basis for p in projections]
    interactions = [
        basis.mH @ p @ complement @ q @ basis
        for i, p in enumerate(projections)
        for j, q in enumerate(projections)
        if i != j
    ]
    offdiag = torch.stack(interactions).sum(0) if interactions else torch.zeros_like(c)
    max_interaction = max((frobenius(term) for term in interactions), default=0.0)

    additive_rank = None
    if max_interaction <= tol.check_tol:
        single = [basis.mH @ p @ basis for p in projections]
        additive_rank = numerical_rank(torch.stack([s - s @ s for s in single]).sum(0), tol)
        if additive_rank != dim_m_next - dim_intersection:
            raise RankIdentityViolationError(
                f"blocks [{n}, {m}]: interactions vanish but the one-block defects have rank {additive_rank}, "
                f"not {dim_m_next - dim_intersection}"
            )

    report = CompressionReport(
        c=c,
        defect=defect,
        defect_rank=defect_rank,
        dim_m_next=dim_m_next,
        dim_intersection=dim_intersection,
    )
    decomposition = BlockDecomposition(
        diagonal_terms=diagonal_terms,
        offdiag=offdiag,
        residual=frobenius(torch.stack(diagonal_terms).sum(0) + offdiag - defect),
        max_interaction=max_interaction,
        additive_rank=additive_rank,
    )
    return report, decomposition


def residual_isometry(
    dil: NaimarkDilation,
    chain: Optional[ResidualChain],
    n: int,
    config: Optional[ResiduaConfig] = None,
) -> IsometryReport:
    """
    The isometry `U` with `U R_{n-1}^{1/2} h = Q_{n-1} V h`, restricted to an orthonormal basis of the support of
    `R_{n-1}` (the support is decided by `kernel_tol`), together with the residuals of the identities it satisfies.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    chain = chain if chain is not None else dil.chain
    if not 1 <= n <= dil.num_blocks:
        raise IndexOutOfRangeError(f"step {n} is not in 1..{dil.num_blocks}")

    previous = chain.residuals[n - 1]
    driver = chain.drivers[n - 1]
    values, vectors = eigh(previous)
    keep = values > relative_threshold(values, tol.kernel_tol)
    support = vectors[:, keep]
    u = dil.tail_projection(n - 1) @ dil.v @ support * values[keep].rsqrt().to(DTYPE).unsqueeze(-2)

    rank = support.shape[1]
    isometry_residual = frobenius(u.mH @ u - identity(rank))
    if isometry_residual > config.factorization_tol:
        raise IsometryViolationError(f"step {n}: u^H u differs from the identity by {isometry_residual:.3e}")

    block, tail = dil.block_projection(n), dil.tail_projection(n)
    eye = identity(dil.h_dim)
    root = psd_sqrt(previous)
    lifted_block = support @ (u.mH @ block @ u) @ support.mH
    lifted_tail = support @ (u.mH @ tail @ u) @ support.mH

    return IsometryReport(
        u=u,
        support=support,
        support_rank=rank,
        isometry_residual=isometry_residual,
        driver_residual=frobenius(support.mH @ driver @ support - u.mH @ block @ u),
        complement_residual=frobenius(support.mH @ (eye - driver) @ support - u.mH @ tail @ u),
        extracted_residual=frobenius(root @ lifted_block @ root - chain.extracted[n - 1]),
        residual_residual=frobenius(root @ lifted_tail @ root - chain.residuals[n]),
    )


def memory_profile(dil: NaimarkDilation, config: Optional[ResiduaConfig] = None) -> List[int]:
    """`dim M_n` for `n = 0, ..., N`: how much dilation space the residual tests still occupy after `n` outputs."""
    return [tail_subspace(dil, n, config).dim for n in range(dil.num_blocks + 1)]


def is_sharp_step(dil: NaimarkDilation, n: int, config: Optional[ResiduaConfig] = None, atol: float = 1e-8) -> bool:
    """Whether `M_n` equals `M_{n-1} & Q_n K`, compared as projections."""
    config = config if config is not None else ResiduaConfig()
    if not 1 <= n <= dil.num_blocks:
        raise IndexOutOfRangeError(f"step {n} is not in 1..{dil.num_blocks}")
    updated = tail_subspace(dil, n, config)
    intersection = intersect(tail_subspace(dil, n - 1, config), _coordinate_tail(dil, n), config.tolerances)
    return frobenius(updated.projection() - intersection.projection()) <= atol
