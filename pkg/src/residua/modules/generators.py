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
"""Seeded random instances for property sweeps."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Union

import torch

from transformers.utils import logging

from ..utils.errors import InvalidSpecError
from .chain import OrderedPovm
from .linalg import DTYPE, REAL_DTYPE, identity, spectral_apply


logger = logging.get_logger(__name__)

MAX_DIM = 64
MAX_SEED = 2**64 - 1


class GenKind(str, Enum):
    RANDOM = "random"
    PVM = "pvm"
    COMMUTING = "commuting"
    COLLAPSED = "collapsed"
    NEAR_PVM = "near_pvm"


@dataclass(frozen=True)
class GenSpec:
    """
    Args:
        dim (`int`):
            Hilbert space dimension, `1 <= dim <= 64`.
        n_effects (`int`):
            Number of coordinates. `pvm` and `near_pvm` need `n_effects <= dim`.
        kind (`GenKind`):
            The instance family.
        seed (`int`):
            Unsigned 64-bit seed of the CPU `torch.Generator`.
    """

    dim: int
    n_effects: int
    kind: Union[GenKind, str]
    seed: int

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", GenKind(self.kind))
        except ValueError:
            raise InvalidSpecError(f"unknown kind {self.kind!r}, expected one of {[k.value for k in GenKind]}")
        if not 1 <= self.dim <= MAX_DIM:
            raise InvalidSpecError(f"dim must lie in [1, {MAX_DIM}], got {self.dim}")
        if self.n_effects < 1:
            raise InvalidSpecError(f"n_effects must be at least 1, got {self.n_effects}")
        if not 0 <= self.seed <= MAX_SEED:
            raise InvalidSpecError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.kind in (GenKind.PVM, GenKind.NEAR_PVM) and self.n_effects > self.dim:
            raise InvalidSpecError(f"{self.kind.value} needs n_effects <= dim, got {self.n_effects} > {self.dim}")


def _complete(effects: Sequence[torch.Tensor]) -> List[torch.Tensor]:
    # last coordinate takes the exact remainder, clamped into [0, I]
    dim = effects[0].shape[0]
    last = identity(dim) - torch.stack(list(effects[:-1])).sum(0) if len(effects) > 1 else identity(dim)
    last = spectral_apply(last, lambda values: values.clamp(0.0, 1.0))
    return list(effects[:-1]) + [last]


def _normalized_gram(factors: Sequence[torch.Tensor], regularization: float) -> List[torch.Tensor]:
    grams = [m.mH @ m for m in factors]
    total = torch.stack(grams).sum(0) + regularization * identity(grams[0].shape[0])
    inverse_root = spectral_apply(total, lambda values: values.rsqrt())
    return [inverse_root @ g @ inverse_root for g in grams]


def _random_unitary(dim: int, generator: torch.Generator) -> torch.Tensor:
    z = torch.randn(dim, dim, dtype=DTYPE, generator=generator)
    q, r = torch.linalg.qr(z)
    phases = torch.diagonal(r) / torch.diagonal(r).abs()
    return q * phases.unsqueeze(-2)


def _random_effects(spec: GenSpec, generator: torch.Generator, regularization: float, rows=None) -> List[torch.Tensor]:
    rows = rows if rows is not None else [spec.dim] * spec.n_effects
    factors = [torch.randn(r, spec.dim, dtype=DTYPE, generator=generator) for r in rows]
    return _normalized_gram(factors, regularization)


def _pvm_effects(spec: GenSpec, generator: torch.Generator) -> List[torch.Tensor]:
    u = _random_unitary(spec.dim, generator)
    cuts = (torch.randperm(spec.dim - 1, generator=generator)[: spec.n_effects - 1] + 1).sort().values.tolist()
    bounds = [0] + cuts + [spec.dim]
    effects = []
    for start, stop in zip(bounds, bounds[1:]):
        columns = u[:, start:stop]
        effects.append(columns @ columns.mH)
    return effects


def _commuting_effects(spec: GenSpec, generator: torch.Generator) -> List[torch.Tensor]:
    n, d = spec.n_effects, spec.dim
    weights = torch.randn(n, d, dtype=REAL_DTYPE, generator=generator).square()
    keep = torch.rand(n, d, dtype=REAL_DTYPE, generator=generator) < 0.5
    rescue = torch.randint(0, n, (d,), generator=generator)
    empty = ~keep.any(0)
    keep[rescue[empty], torch.arange(d)[empty]] = True
    weights = torch.where(keep, weights, torch.zeros_like(weights))
    weights = weights / weights.sum(0, keepdim=True)
    return [torch.diag(row).to(DTYPE) for row in weights]


def gen(spec: GenSpec, config=None):
    """
    Draw the instance described by `spec`. Deterministic in `(kind, dim, n_effects, seed)`.

    Returns:
        `OrderedPovm`, or `CollapsedPovm` for the `collapsed` kind.
    """
    from ..models.configuration_residua import ResiduaConfig

    config = config if config is not None else ResiduaConfig()
    generator = torch.Generator(device="cpu").manual_seed(spec.seed)
    regularization = config.gen_regularization

    if spec.kind == GenKind.RANDOM:
        effects = _random_effects(spec, generator, regularization)
    elif spec.kind == GenKind.PVM:
        effects = _pvm_effects(spec, generator)
    elif spec.kind == GenKind.COMMUTING:
        effects = _commuting_effects(spec, generator)
    elif spec.kind == GenKind.NEAR_PVM:
        mix = config.near_pvm_mix
        sharp = _pvm_effects(spec, generator)
        noise = _random_effects(spec, generator, regularization)
        effects = [(1.0 - mix) * p + mix * a for p, a in zip(sharp, noise)]
    else:
        from ..models.modeling_collapse import collapse_map

        # rank-one leading factors leave one-dimensional sectors for the collapse
        rows = [1] * (spec.n_effects - 1) + [spec.dim]
        effects = _random_effects(spec, generator, regularization, rows=rows)
        povm = OrderedPovm(_complete(effects), check_tol=config.check_tol)
        return collapse_map(povm, config)

    logger.debug(f"generated {spec.kind.value} instance dim={spec.dim} n={spec.n_effects} seed={spec.seed}")
    return OrderedPovm(_complete(effects), check_tol=config.check_tol)
