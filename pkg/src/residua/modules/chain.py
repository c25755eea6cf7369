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
"""Ordered POVMs and the residual recursion."""

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import torch

from transformers.utils import ModelOutput, logging

from ..utils.errors import (
    DimensionMismatchError,
    FactorizationViolationError,
    NotNormalizedError,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    EFFECT_TOL,
    HERMITIAN_TOL,
    Tolerances,
    as_effect,
    eigh,
    frobenius,
    identity,
    min_eigenvalue,
    psd_sqrt,
    relative_threshold,
)


logger = logging.get_logger(__name__)

ORIGINAL = "orig"
TERMINAL = "term"


class Label(NamedTuple):
    kind: str
    index: int

    @classmethod
    def original(cls, index: int) -> "Label":
        return cls(ORIGINAL, index)

    @classmethod
    def terminal(cls, step: int) -> "Label":
        return cls(TERMINAL, step)

    @classmethod
    def parse(cls, text: str) -> "Label":
        kind, sep, index = text.partition(":")
        if not sep or kind not in (ORIGINAL, TERMINAL):
            raise ValueError(f"label {text!r} is not of the form 'orig:k' or 'term:i'")
        try:
            index = int(index)
        except ValueError:
            raise ValueError(f"label {text!r} has a non-integer index")
        if index < 1:
            raise ValueError(f"label {text!r} has index < 1")
        return cls(kind, index)

    @property
    def is_original(self) -> bool:
        return self.kind == ORIGINAL

    def __str__(self):
        return f"{self.kind}:{self.index}"


def _validate_labels(labels: Sequence[Label]) -> None:
    originals = [label.index for label in labels if label.is_original]
    terminals = [label.index for label in labels if not label.is_original]
    if originals != list(range(1, len(originals) + 1)):
        raise ValueError(f"original labels must run 1, 2, ... in order, got {originals}")
    if any(earlier >= later for earlier, later in zip(terminals, terminals[1:])):
        raise ValueError(f"terminal labels must increase with their creation step, got {terminals}")
    first_terminal = next((i for i, label in enumerate(labels) if not label.is_original), len(labels))
    if any(label.is_original for label in labels[first_terminal:]):
        raise ValueError("original coordinates must precede every terminal coordinate")


class OrderedPovm:
    """
    A finite ordered list of effects summing to the identity, each coordinate tagged as an original
    outcome `orig:k` or as the terminal outcome `term:i` created at step `i`.

    Args:
        effects (`Sequence[torch.Tensor]`):
            The coordinates, each a `dim x dim` PSD contraction.
        labels (`Sequence[Label]`, *optional*):
            Per-coordinate labels. Defaults to `orig:1, ..., orig:N`.
        check_tol (`float`, *optional*, defaults to 1e-10):
            Allowed Frobenius distance between the sum of the coordinates and the identity.
        effect_tol (`float`, *optional*, defaults to 1e-10):
            Eigenvalue clamping window of each coordinate.
        hermitian_tol (`float`, *optional*, defaults to 1e-12):
            Allowed relative asymmetry of each coordinate.
    """

    def __init__(
        self,
        effects: Sequence[torch.Tensor],
        labels: Optional[Sequence[Label]] = None,
        check_tol: float = DEFAULT_TOLERANCES.check_tol,
        effect_tol: float = EFFECT_TOL,
        hermitian_tol: float = HERMITIAN_TOL,
    ):
        if len(effects) == 0:
            raise DimensionMismatchError("an ordered POVM needs at least one coordinate")
        effects = [as_effect(e, effect_tol, hermitian_tol) for e in effects]
        dims = {e.shape[0] for e in effects}
        if len(dims) != 1:
            raise DimensionMismatchError(f"coordinates of different dimensions {sorted(dims)}")
        if labels is None:
            labels = [Label.original(k + 1) for k in range(len(effects))]
        labels = [label if isinstance(label, Label) else Label.parse(label) for label in labels]
        if len(labels) != len(effects):
            raise DimensionMismatchError(f"{len(labels)} labels for {len(effects)} coordinates")
        _validate_labels(labels)

        self.effects = effects
        self.labels = labels
        self.dim = dims.pop()

        residual = self.normalization_residual()
        if residual > check_tol:
            raise NotNormalizedError(f"coordinates sum to the identity only within {residual:.3e} > {check_tol:.1e}")

    def __len__(self):
        return len(self.effects)

    def __repr__(self):
        return f"OrderedPovm(dim={self.dim}, labels=[{', '.join(str(label) for label in self.labels)}])"

    def total(self) -> torch.Tensor:
        return torch.stack(self.effects).sum(0)

    def normalization_residual(self) -> float:
        return frobenius(self.total() - identity(self.dim))

    def originals(self) -> List[torch.Tensor]:
        return [e for e, label in zip(self.effects, self.labels) if label.is_original]

    def terminals(self) -> List[torch.Tensor]:
        return [e for e, label in zip(self.effects, self.labels) if not label.is_original]

    def next_terminal_step(self) -> int:
        steps = [label.index for label in self.labels if not label.is_original]
        return steps[-1] + 1 if steps else 1


@dataclass
class ResidualChain(ModelOutput):
    """
    Output of the residual recursion.

    Args:
        extracted (`List[torch.Tensor]`):
            The extracted effects `T_1, ..., T_N`.
        residuals (`List[torch.Tensor]`):
            The residual effects `R_0 = I, R_1, ..., R_N`.
        drivers (`List[torch.Tensor]`):
            The driving contractions `A_1, ..., A_N` the chain was run on.
    """

    extracted: List[torch.Tensor] = None
    residuals: List[torch.Tensor] = None
    drivers: List[torch.Tensor] = None

    def partition_residual(self) -> float:
        dim = self.residuals[0].shape[0]
        return frobenius(torch.stack(self.extracted).sum(0) + self.residuals[-1] - identity(dim))


def run_chain(
    drivers: Sequence[torch.Tensor],
    tol: Tolerances = DEFAULT_TOLERANCES,
    effect_tol: float = EFFECT_TOL,
    hermitian_tol: float = HERMITIAN_TOL,
) -> ResidualChain:
    """
    Run the residual recursion `T_n = R_{n-1}^{1/2} A_n R_{n-1}^{1/2}`, `R_n = R_{n-1}^{1/2} (I - A_n) R_{n-1}^{1/2}`
    starting from `R_0 = I`.
    """
    if len(drivers) == 0:
        raise DimensionMismatchError("the residual recursion needs at least one driver")
    drivers = [as_effect(a, effect_tol, hermitian_tol) for a in drivers]
    dims = {a.shape[0] for a in drivers}
    if len(dims) != 1:
        raise DimensionMismatchError(f"drivers of different dimensions {sorted(dims)}")
    eye = identity(dims.pop())

    extracted, residuals = [], [eye]
    residual = eye
    for n, a in enumerate(drivers):
        # R_0 = I needs no root
        root = eye if n == 0 else psd_sqrt(residual)
        extracted.append(as_effect(root @ a @ root, effect_tol))
        residual = as_effect(root @ (eye - a) @ root, effect_tol)
        residuals.append(residual)

    chain = ResidualChain(extracted=extracted, residuals=residuals, drivers=drivers)
    defect = chain.partition_residual()
    if defect > tol.check_tol:
        logger.warning(f"partition identity holds only within {defect:.3e} > {tol.check_tol:.1e}")
    return chain


def recover_contractions(
    povm: OrderedPovm,
    tol: Tolerances = DEFAULT_TOLERANCES,
    factorization_tol: float = 1e-8,
) -> List[torch.Tensor]:
    """
    Recover driving contractions `A_n` with `T_n = R_{n-1}^{1/2} A_n R_{n-1}^{1/2}`, where `R_n = I - sum_{m<=n} T_m`.

    On the support of `R_{n-1}` the contraction is the conjugation of `T_n` by the pseudo-inverse of the root,
    on its kernel it is zero.
    """
    eye = identity(povm.dim)
    residual = eye
    cumulative = torch.zeros_like(eye)
    contractions = []
    for n, t in enumerate(povm.effects, start=1):
        if min_eigenvalue(residual - t) < -tol.check_tol:
            raise FactorizationViolationError(
                f"coordinate {n} is not dominated by the residual: min eigenvalue of R_{n - 1} - T_{n} is "
                f"{min_eigenvalue(residual - t):.3e}"
            )
        values, vectors = eigh(residual)
        keep = values > relative_threshold(values, tol.kernel_tol)
        support = vectors[:, keep]
        inverse_root = (support * values[keep].rsqrt().to(support.dtype).unsqueeze(-2)) @ support.mH
        a = inverse_root @ t @ inverse_root
        a = (a + a.mH) / 2

        low, high = eigh(a)[0][[0, -1]].tolist()
        if low < -factorization_tol or high > 1.0 + factorization_tol:
            raise FactorizationViolationError(
                f"recovered contraction {n} has spectrum [{low:.3e}, {high:.3e}] outside [0, 1]"
            )
        contractions.append(as_effect(a, tol=max(factorization_tol, EFFECT_TOL)))

        cumulative = cumulative + t
        residual = eye - cumulative
    return contractions
