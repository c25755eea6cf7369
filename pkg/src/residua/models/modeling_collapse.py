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
"""The collapse map, collapsed POVMs and their fibers."""

from typing import List, Optional, Sequence

import torch
from torch import nn

from transformers.utils import logging

from ..modules.chain import Label, OrderedPovm
from ..modules.linalg import (
    DEFAULT_TOLERANCES,
    EFFECT_TOL,
    HERMITIAN_TOL,
    Tolerances,
    as_effect,
    as_matrix,
    eigh,
    frobenius,
    identity,
    joint_kernel_projection,
    kernel_projection,
    max_eigenvalue,
    min_eigenvalue,
    relative_threshold,
    support_projection,
    zeros,
)
from ..utils.errors import (
    CollapseInvariantViolationError,
    DimensionMismatchError,
    InfeasibleCouplingError,
    NotCollapsedError,
    NotNormalizedError,
)
from .configuration_residua import ResiduaConfig
from .modeling_outputs import CollapseCheck, FiberReport


logger = logging.get_logger(__name__)


class CollapsedPovm:
    """
    Candidate collapsed POVM: non-escape coordinates `B_1, ..., B_N` and the escape coordinate `B_esc`, with
    the derived support projections `S_k`, the kernel filtration `E_k = ker(S_1 + ... + S_k)` and the
    leftovers `L_k = S_k - B_k`. Construction only checks normalization, use `is_collapsed` for the rest.

    Args:
        b (`Sequence[torch.Tensor]`):
            Non-escape coordinates, zero coordinates allowed.
        b_esc (`torch.Tensor`):
            Escape coordinate.
        tol (`Tolerances`, *optional*):
            Kernel threshold for supports and the normalization threshold.
        effect_tol (`float`, *optional*, defaults to 1e-10):
            Eigenvalue clamping window of each coordinate.
        hermitian_tol (`float`, *optional*, defaults to 1e-12):
            Allowed relative asymmetry of each coordinate.
    """

    def __init__(
        self,
        b: Sequence[torch.Tensor],
        b_esc: torch.Tensor,
        tol: Tolerances = DEFAULT_TOLERANCES,
        effect_tol: float = EFFECT_TOL,
        hermitian_tol: float = HERMITIAN_TOL,
    ):
        if len(b) == 0:
            raise DimensionMismatchError("a collapsed POVM needs at least one non-escape coordinate")
        self.b = [as_effect(x, effect_tol, hermitian_tol) for x in b]
        self.b_esc = as_effect(b_esc, effect_tol, hermitian_tol)
        dims = {x.shape[0] for x in self.b} | {self.b_esc.shape[0]}
        if len(dims) != 1:
            raise DimensionMismatchError(f"coordinates of different dimensions {sorted(dims)}")
        self.dim = dims.pop()

        residual = self.normalization_residual()
        if residual > tol.check_tol:
            raise NotNormalizedError(f"coordinates sum to the identity only within {residual:.3e} > {tol.check_tol:.1e}")

        self.supports = [support_projection(x, tol) for x in self.b]
        self.leftovers = [s - x for s, x in zip(self.supports, self.b)]
        self.filtration = []
        cumulative = zeros(self.dim)
        for s in self.supports:
            cumulative = cumulative + s
            self.filtration.append(kernel_projection(cumulative, tol))

    def __len__(self):
        return len(self.b)

    def __repr__(self):
        return f"CollapsedPovm(dim={self.dim}, n_coords={len(self.b)})"

    def normalization_residual(self) -> float:
        return frobenius(torch.stack(self.b).sum(0) + self.b_esc - identity(self.dim))

    def filtration_at(self, k: int) -> torch.Tensor:
        """`E_k`, with `E_0 = I` and `E_k = E_N` beyond the last coordinate."""
        if k == 0:
            return identity(self.dim)
        return self.filtration[min(k, len(self.filtration)) - 1]

    def padded(self, n: int) -> List[torch.Tensor]:
        return self.b + [zeros(self.dim)] * max(0, n - len(self.b))

    def to_povm(self, check_tol: float = DEFAULT_TOLERANCES.check_tol) -> OrderedPovm:
        """The ordered POVM `(B_1, ..., B_N, B_esc)` with the escape as the first terminal coordinate."""
        labels = [Label.original(k + 1) for k in range(len(self.b))] + [Label.terminal(1)]
        return OrderedPovm(self.b + [self.b_esc], labels, check_tol=check_tol)

    @classmethod
    def from_povm(cls, povm: OrderedPovm, tol: Tolerances = DEFAULT_TOLERANCES) -> "CollapsedPovm":
        """Read originals as non-escape coordinates and fold every terminal coordinate into the escape."""
        terminals = povm.terminals()
        escape = torch.stack(terminals).sum(0) if terminals else zeros(povm.dim)
        return cls(povm.originals(), escape, tol=tol)


class CouplingSpec:
    """
    Coupling data of a fiber member: `c_block` is a PSD operator supported on `S_1 H`, `x_block` maps `S_1 H` into
    `S_2 H`. Both are given as `dim x dim` operators on the whole space.
    """

    def __init__(self, c_block: torch.Tensor, x_block: torch.Tensor):
        self.c_block = as_matrix(c_block)
        x_block = torch.as_tensor(x_block)
        self.x_block = x_block.to(self.c_block.dtype)
        if self.x_block.shape != self.c_block.shape:
            raise DimensionMismatchError(
                f"coupling blocks of shapes {tuple(self.c_block.shape)} and {tuple(self.x_block.shape)}"
            )

    def blocks(self, b: CollapsedPovm) -> "tuple[torch.Tensor, torch.Tensor]":
        """The two block operators `[[C, X^H], [X, B_2]]` and `[[L_1 - C, -X^H], [-X, L_2]]` on `S_1 H + S_2 H`."""
        c, x = self.c_block, self.x_block
        first = c + x + x.mH + b.b[1]
        second = b.leftovers[0] - c - x - x.mH + b.leftovers[1]
        return first, second


class CollapseMap(nn.Module):
    """
    The collapse map `B_k = P_{k-1} A_k P_{k-1}`, `P_{k-1}` the projection onto the joint kernel of the earlier
    originals, `B_esc = I - sum_k B_k`.
    """

    def __init__(self, config: Optional[ResiduaConfig] = None):
        super().__init__()
        self.config = config if config is not None else ResiduaConfig()

    def forward(self, povm: OrderedPovm) -> CollapsedPovm:
        tol = self.config.tolerances
        residual = povm.normalization_residual()
        if residual > tol.check_tol:
            raise NotNormalizedError(f"input sums to the identity only within {residual:.3e} > {tol.check_tol:.1e}")

        originals = povm.originals()
        b = []
        for k, a in enumerate(originals):
            kernel = joint_kernel_projection(originals[:k], tol, dim=povm.dim)
            b.append(kernel @ a @ kernel)
        eye = identity(povm.dim)
        escape = eye - torch.stack(b).sum(0) if b else eye
        if not b:
            raise CollapseInvariantViolationError("the input has no original coordinate to collapse")
        collapsed = CollapsedPovm(
            b, escape, tol=tol, effect_tol=self.config.effect_tol, hermitian_tol=self.config.hermitian_tol
        )

        check = is_collapsed(collapsed, self.config)
        if not check.is_collapsed:
            # mass held by terminal coordinates may leave a common kernel of the originals
            if povm.terminals() and check.worst_product <= tol.check_tol:
                logger.info(f"originals leave a common kernel, support defect {check.support_defect:.3e}")
            else:
                raise CollapseInvariantViolationError(
                    f"collapse broke its invariants: worst product {check.worst_product:.3e} at {check.worst_pair}, "
                    f"support defect {check.support_defect:.3e}"
                )
        return collapsed

    def extra_repr(self):
        return f"kernel_tol={self.config.kernel_tol}, check_tol={self.config.check_tol}"


def collapse_map(povm: OrderedPovm, config: Optional[ResiduaConfig] = None) -> CollapsedPovm:
    return CollapseMap(config)(povm)


def is_collapsed(q: CollapsedPovm, config: Optional[ResiduaConfig] = None) -> CollapseCheck:
    """
    Test orthogonality of the non-escape coordinates and the support condition `sum_k S_k = I`.
    Zero coordinates have zero support and drop out of the sum.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    residual = q.normalization_residual()
    if residual > tol.check_tol:
        raise NotNormalizedError(f"candidate sums to the identity only within {residual:.3e} > {tol.check_tol:.1e}")

    worst_pair, worst_product = None, 0.0
    for i in range(len(q.b)):
        for j in range(i + 1, len(q.b)):
            product = frobenius(q.b[i] @ q.b[j])
            if worst_pair is None or product > worst_product:
                worst_pair, worst_product = (i + 1, j + 1), product

    support_defect = frobenius(torch.stack(q.supports).sum(0) - identity(q.dim))
    escape_identity_residual = max(frobenius(x @ q.b_esc - (x - x @ x)) for x in q.b)
    return CollapseCheck(
        is_collapsed=worst_product <= tol.check_tol and support_defect <= tol.check_tol,
        worst_pair=worst_pair,
        worst_product=worst_product,
        support_defect=support_defect,
        escape_identity_residual=escape_identity_residual,
    )


def _require_collapsed(b: CollapsedPovm, config: ResiduaConfig) -> None:
    check = is_collapsed(b, config)
    if not check.is_collapsed:
        raise NotCollapsedError(
            f"not collapsed: worst product {check.worst_product:.3e} at {check.worst_pair}, "
            f"support defect {check.support_defect:.3e}"
        )


def _with_tail(effects: List[torch.Tensor], tail: torch.Tensor, check_tol: float) -> OrderedPovm:
    # the leftover of the last sector closes the list as a terminal outcome
    labels = [Label.original(k + 1) for k in range(len(effects))]
    if frobenius(tail) > check_tol:
        effects = effects + [tail]
        labels = labels + [Label.terminal(1)]
    return OrderedPovm(effects, labels, check_tol=check_tol)


def canonical_preimage(b: CollapsedPovm, config: Optional[ResiduaConfig] = None) -> OrderedPovm:
    """`A_1 = B_1`, `A_k = B_k + L_{k-1}`, closed by the terminal coordinate `L_N` when it is nonzero."""
    config = config if config is not None else ResiduaConfig()
    _require_collapsed(b, config)
    effects = [b.b[0]] + [x + left for x, left in zip(b.b[1:], b.leftovers[:-1])]
    return _with_tail(effects, b.leftovers[-1], config.check_tol)


def fiber_membership(p: OrderedPovm, b: CollapsedPovm, config: Optional[ResiduaConfig] = None) -> FiberReport:
    """
    Test, level by level, that the joint kernel of the earlier originals equals `E_{k-1}` and that the
    compression of `A_k` to `E_{k-1}` equals `B_k`.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    if p.dim != b.dim:
        raise DimensionMismatchError(f"ordered POVM on C^{p.dim} against a collapsed POVM on C^{b.dim}")

    originals = p.originals()
    n = max(len(originals), len(b.b))
    originals = originals + [zeros(p.dim)] * (n - len(originals))
    targets = b.padded(n)

    kernel_distances, compression_distances = [], []
    for k in range(n):
        kernel = joint_kernel_projection(originals[:k], tol, dim=p.dim)
        level = b.filtration_at(k)
        kernel_distances.append(frobenius(kernel - level))
        compression_distances.append(frobenius(level @ originals[k] @ level - targets[k]))
    is_member = max(kernel_distances + compression_distances) <= tol.check_tol

    collapsed = collapse_map(p, config)
    m = max(len(collapsed.b), n)
    collapse_agrees = frobenius(collapsed.b_esc - b.b_esc) <= tol.check_tol and all(
        frobenius(x - y) <= tol.check_tol for x, y in zip(collapsed.padded(m), b.padded(m))
    )
    if collapse_agrees != is_member:
        logger.warning(
            f"fiber test ({is_member}) and collapse comparison ({collapse_agrees}) disagree, "
            f"largest level distance {max(kernel_distances + compression_distances):.3e}"
        )
    return FiberReport(
        is_member=is_member,
        kernel_distances=kernel_distances,
        compression_distances=compression_distances,
        collapse_agrees=collapse_agrees,
    )


def couple_fiber(b: CollapsedPovm, spec: CouplingSpec, config: Optional[ResiduaConfig] = None) -> OrderedPovm:
    """
    Build a fiber member whose second coordinate couples the first two support sectors:
    `A_2 = [[C, X^H], [X, B_2]]`, `A_3 = B_3 + [[L_1 - C, -X^H], [-X, L_2]]`, `A_k = B_k + L_{k-1}` for `k >= 4`.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    _require_collapsed(b, config)
    if len(b.b) < 3:
        raise InfeasibleCouplingError(f"coupling needs three non-escape coordinates, got {len(b.b)}")
    if spec.c_block.shape[0] != b.dim:
        raise DimensionMismatchError(f"coupling blocks on C^{spec.c_block.shape[0]} for a POVM on C^{b.dim}")

    first_sector, second_sector = b.supports[0], b.supports[1]
    c, x = spec.c_block, spec.x_block
    if frobenius(first_sector @ c @ first_sector - c) > tol.check_tol:
        raise InfeasibleCouplingError("c_block is not supported on the first sector")
    if frobenius(second_sector @ x @ first_sector - x) > tol.check_tol:
        raise InfeasibleCouplingError("x_block does not map the first sector into the second")

    first, second = spec.blocks(b)
    for name, block in (("first", first), ("second", second)):
        low = min_eigenvalue(block)
        if low < -tol.check_tol:
            raise InfeasibleCouplingError(f"{name} block has eigenvalue {low:.3e} < {-tol.check_tol:.1e}")

    effects = [b.b[0], first, b.b[2] + second]
    effects += [x_k + left for x_k, left in zip(b.b[3:], b.leftovers[2:-1])]
    p = _with_tail(effects, b.leftovers[-1], tol.check_tol)

    report = fiber_membership(p, b, config)
    if not report.is_member:
        raise CollapseInvariantViolationError(
            f"coupled member left the fiber: level distances {report.kernel_distances}, {report.compression_distances}"
        )
    return p


def max_coupling(
    b: CollapsedPovm,
    direction: torch.Tensor,
    c_block: torch.Tensor,
    config: Optional[ResiduaConfig] = None,
) -> float:
    """
    Largest `sigma >= 0` such that `CouplingSpec(c_block, sigma * direction)` is feasible, `direction` taken with unit
    Frobenius norm. Bisection on the smallest eigenvalues of the two block operators restricted to the ranges of
    their uncoupled versions; returns 0 when the coupling moves a kernel vector of an uncoupled block.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    _require_collapsed(b, config)
    if len(b.b) < 2:
        raise InfeasibleCouplingError(f"coupling needs two non-escape coordinates, got {len(b.b)}")
    direction = torch.as_tensor(direction).to(b.b[0].dtype)
    norm = frobenius(direction)
    if norm == 0.0:
        raise ValueError("the coupling direction must be nonzero")
    direction = direction / norm
    sym = direction + direction.mH

    base = CouplingSpec(c_block, torch.zeros_like(direction)).blocks(b)
    restricted = []
    for sign, block in zip((1.0, -1.0), base):
        values, vectors = eigh(block)
        if values[0].item() < -tol.check_tol:
            raise InfeasibleCouplingError(f"c_block is infeasible even without coupling, eigenvalue {values[0].item():.3e}")
        keep = values > relative_threshold(values, tol.kernel_tol)
        if frobenius(sym @ vectors[:, ~keep]) > tol.check_tol:
            return 0.0
        span = vectors[:, keep]
        restricted.append((span.mH @ block @ span, sign * (span.mH @ sym @ span)))

    def feasible(sigma: float) -> bool:
        return all(
            m0.numel() == 0 or min_eigenvalue(m0 + sigma * m1) >= 0.0
            for m0, m1 in restricted
        )

    low, high = 0.0, 1.0
    while feasible(high):
        low, high = high, 2.0 * high
        if high > 2.0**20:
            logger.warning_once("coupling direction is feasible at every tested scale")
            return low
    while high - low > config.coupling_precision:
        mid = 0.5 * (low + high)
        if feasible(mid):
            low = mid
        else:
            high = mid
    return low


def collapse_limit_is_normalized(b: CollapsedPovm, config: Optional[ResiduaConfig] = None) -> bool:
    """The limit of the residual transform on a collapsed POVM keeps only `B_k`, a POVM exactly when `B_esc = 0`."""
    config = config if config is not None else ResiduaConfig()
    return frobenius(b.b_esc) <= config.check_tol


def escape_has_no_unit_eigenvalue(b: CollapsedPovm, config: Optional[ResiduaConfig] = None) -> bool:
    """`ker(I - B_esc) = {0}`, which holds for every collapsed POVM."""
    config = config if config is not None else ResiduaConfig()
    return max_eigenvalue(b.b_esc) < 1.0 - config.kernel_tol
