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
"""The residual transform, its iteration and its convergence diagnostics."""

import math
from typing import List, Optional, Sequence, Tuple

import torch
from torch import nn

from transformers.utils import logging

from ..modules.chain import Label, OrderedPovm, run_chain
from ..modules.linalg import (
    REAL_DTYPE,
    compress,
    frobenius,
    identity,
    is_projection_valued,
    joint_kernel_projection,
    matrix_power,
    min_eigenvalue,
    support_basis,
)
from ..utils.errors import DimensionMismatchError, IndexOutOfRangeError, NotEffectError, NotNormalizedError
from .configuration_residua import ResiduaConfig
from .modeling_collapse import collapse_map
from .modeling_outputs import ConvergenceReport, GapReport, PsiIterate


logger = logging.get_logger(__name__)

# distances at or below this are rounding noise and carry no ratio information
RATIO_FLOOR = 1e-13


def _require_normalized(p: OrderedPovm, check_tol: float) -> None:
    residual = p.normalization_residual()
    if residual > check_tol:
        raise NotNormalizedError(f"input sums to the identity only within {residual:.3e} > {check_tol:.1e}")


def _fold_terminals(p: OrderedPovm, check_tol: float) -> OrderedPovm:
    terminals = [(e, label) for e, label in zip(p.effects, p.labels) if not label.is_original]
    if len(terminals) <= 1:
        return p
    escape = torch.stack([e for e, _ in terminals]).sum(0)
    labels = [label for label in p.labels if label.is_original] + [terminals[-1][1]]
    return OrderedPovm(p.originals() + [escape], labels, check_tol=check_tol)


def _observed_ratio(values: Sequence[float], window: int) -> Optional[float]:
    tail = [v for v in values[-(window + 1):] if v > RATIO_FLOOR]
    if len(tail) < 2:
        return None
    return (tail[-1] / tail[0]) ** (1.0 / (len(tail) - 1))


class ResidualTransform(nn.Module):
    """
    The residual transform. Runs the residual recursion over the coordinates in list order, keeps the extracted
    effects under their labels and appends the final residual as a new terminal coordinate.

    Args:
        config (`ResiduaConfig`, *optional*):
            Supplies the tolerances and the default iteration budget.
    """

    def __init__(self, config: Optional[ResiduaConfig] = None):
        super().__init__()
        self.config = config if config is not None else ResiduaConfig()

    def forward(self, povm: OrderedPovm) -> OrderedPovm:
        tol = self.config.tolerances
        _require_normalized(povm, tol.check_tol)
        chain = run_chain(
            povm.effects, tol, effect_tol=self.config.effect_tol, hermitian_tol=self.config.hermitian_tol
        )
        effects = chain.extracted + [chain.residuals[-1]]
        labels = list(povm.labels) + [Label.terminal(povm.next_terminal_step())]
        return OrderedPovm(
            effects,
            labels,
            check_tol=tol.check_tol,
            effect_tol=self.config.effect_tol,
            hermitian_tol=self.config.hermitian_tol,
        )

    def iterate(
        self,
        povm: OrderedPovm,
        m_max: Optional[int] = None,
        track_terminals: bool = True,
    ) -> Tuple[PsiIterate, ConvergenceReport]:
        """
        Apply the transform until the originals stop moving or `m_max` applications are done.

        Args:
            povm (`OrderedPovm`):
                The starting point.
            m_max (`int`, *optional*):
                Iteration budget, defaults to `config.psi_max_steps`.
            track_terminals (`bool`, *optional*, defaults to `True`):
                Keep every terminal coordinate. When unset, terminals are folded into one coordinate labeled with the
                newest step after each application, which leaves the originals unchanged.
        """
        tol = self.config.tolerances
        m_max = m_max if m_max is not None else self.config.psi_max_steps
        if m_max < 0:
            raise ValueError(f"m_max must be nonnegative, got {m_max}")
        _require_normalized(povm, tol.check_tol)

        targets = collapse_map(povm, self.config).b

        def distances_to_targets(p: OrderedPovm) -> List[float]:
            return [frobenius(a - b) for a, b in zip(p.originals(), targets)]

        distances = [distances_to_targets(povm)]
        current, converged, steps = povm, False, 0
        for step in range(1, m_max + 1):
            nxt = self(current)
            if not track_terminals:
                nxt = _fold_terminals(nxt, tol.check_tol)
            move = max(frobenius(a - b) for a, b in zip(nxt.originals(), current.originals()))
            current, steps = nxt, step
            distances.append(distances_to_targets(current))
            logger.debug(f"step {step}: originals moved by {move:.3e}")
            if move <= tol.conv_tol:
                converged = True
                break

        if m_max > 0 and not converged:
            logger.warning(f"residual transform did not converge in {m_max} steps, last distance {max(distances[-1]):.3e}")
        report = ConvergenceReport(
            distances=distances,
            converged=converged,
            observed_ratio=_observed_ratio([max(d, default=0.0) for d in distances], self.config.ratio_window),
            steps=steps,
        )
        return PsiIterate(povm=current, step=steps), report

    def extra_repr(self):
        return f"psi_max_steps={self.config.psi_max_steps}, conv_tol={self.config.conv_tol}"


def psi(p: OrderedPovm, config: Optional[ResiduaConfig] = None) -> OrderedPovm:
    return ResidualTransform(config)(p)


def iterate_psi(
    p: OrderedPovm,
    m_max: Optional[int] = None,
    config: Optional[ResiduaConfig] = None,
    track_terminals: bool = True,
) -> Tuple[PsiIterate, ConvergenceReport]:
    return ResidualTransform(config).iterate(p, m_max=m_max, track_terminals=track_terminals)


def gap_report(p: OrderedPovm, k: int, config: Optional[ResiduaConfig] = None) -> GapReport:
    """
    Gap constants `epsilon_r`, `r = 2, ..., k`: the smallest eigenvalue of the accumulated collapsed mass
    `G_{r-1} = sum_{j<r} P_{j-1} A_j P_{j-1}` on the complement of the joint kernel `F_{r-1}` of the first
    `r - 1` originals. An empty complement gives `epsilon_r = 1`.
    """
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    _require_normalized(p, tol.check_tol)
    originals = p.originals()
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > len(originals):
        raise IndexOutOfRangeError(f"k = {k} exceeds the {len(originals)} original coordinates")

    eye = identity(p.dim)
    accumulated = torch.zeros_like(eye)
    epsilons = []
    for r in range(2, k + 1):
        previous = joint_kernel_projection(originals[: r - 2], tol, dim=p.dim)
        accumulated = accumulated + previous @ originals[r - 2] @ previous
        complement = support_basis(eye - joint_kernel_projection(originals[: r - 1], tol, dim=p.dim), tol)
        epsilon = 1.0 if complement.dim == 0 else min_eigenvalue(compress(accumulated, complement))
        epsilons.append(min(max(epsilon, 0.0), 1.0))

    predicted_rho = max((math.sqrt(1.0 - e) for e in epsilons), default=0.0)
    return GapReport(
        epsilons=epsilons,
        predicted_rho=predicted_rho,
        gap_holds=all(e > tol.rank_tol for e in epsilons),
    )


def is_pvm_fixed_point(p: OrderedPovm, config: Optional[ResiduaConfig] = None) -> bool:
    """Whether one application of the transform leaves every coordinate in place and appends a zero terminal."""
    config = config if config is not None else ResiduaConfig()
    tol = config.tolerances
    out = psi(p, config)
    move = max(frobenius(a - b) for a, b in zip(out.effects, p.effects))
    fixed = move <= tol.check_tol and frobenius(out.effects[-1]) <= tol.check_tol

    direct = is_projection_valued(p.effects, tol)
    if fixed != direct:
        logger.warning(f"fixed point test ({fixed}) disagrees with the projection test ({direct}), move {move:.3e}")
    return fixed


def second_coordinate_law(p: OrderedPovm, m: int) -> torch.Tensor:
    """Closed form of the second original after `m` applications: `(I - A_1)^{m/2} A_2 (I - A_1)^{m/2}`."""
    originals = p.originals()
    if len(originals) < 2:
        raise IndexOutOfRangeError(f"the law needs two original coordinates, got {len(originals)}")
    root = matrix_power(identity(p.dim) - originals[0], m / 2)
    return root @ originals[1] @ root


def _diagonal_drivers(diag_drivers, check_tol: float) -> torch.Tensor:
    a = torch.as_tensor(diag_drivers, dtype=REAL_DTYPE)
    if a.dim() != 2:
        raise DimensionMismatchError(f"expected one diagonal per coordinate, got shape {tuple(a.shape)}")
    if a.min().item() < -check_tol or a.max().item() > 1.0 + check_tol:
        raise NotEffectError(f"diagonal entries span [{a.min().item():.3e}, {a.max().item():.3e}], outside [0, 1]")
    defect = (a.sum(0) - 1.0).abs().max().item()
    if defect > check_tol:
        raise NotNormalizedError(f"diagonals sum to one only within {defect:.3e} > {check_tol:.1e}")
    return a.clamp(0.0, 1.0)


def commuting_scalar_oracle(diag_drivers, m: int, check_tol: float = 1e-10) -> torch.Tensor:
    """
    Iterates of the original coordinates of a diagonal ordered POVM, entry by entry:
    `a_k <- a_k prod_{j<k} (1 - a_j)`.

    Args:
        diag_drivers (`Sequence[Sequence[float]]`):
            One diagonal per coordinate, shape `(K, L)`.
        m (`int`):
            Number of applications.

    Returns:
        `torch.Tensor` of shape `(m + 1, K, L)`, step 0 first.
    """
    a = _diagonal_drivers(diag_drivers, check_tol)
    iterates = [a]
    for _ in range(m):
        survived = torch.cumprod(1.0 - a, dim=0)
        prefix = torch.cat([torch.ones_like(a[:1]), survived[:-1]])
        a = a * prefix
        iterates.append(a)
    return torch.stack(iterates)


def commuting_limit(diag_drivers, kernel_tol: float = 1e-9, check_tol: float = 1e-10) -> torch.Tensor:
    """Limit of the scalar recursion: `a_k` where every earlier entry vanishes, 0 elsewhere."""
    a = _diagonal_drivers(diag_drivers, check_tol)
    vanished = torch.cumprod((a <= kernel_tol).to(REAL_DTYPE), dim=0)
    earlier_vanished = torch.cat([torch.ones_like(a[:1]), vanished[:-1]])
    return a * earlier_vanished


def truncated_harmonic_povm(d: int, check_tol: float = 1e-10) -> OrderedPovm:
    """Two-outcome POVM with `A_1 = diag(1, 1/2, ..., 1/d)` and `A_2 = I - A_1`."""
    if d < 1:
        raise ValueError(f"dimension must be at least 1, got {d}")
    first = torch.diag(1.0 / torch.arange(1, d + 1, dtype=REAL_DTYPE)).to(identity(d).dtype)
    return OrderedPovm([first, identity(d) - first], check_tol=check_tol)
