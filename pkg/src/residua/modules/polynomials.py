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
"""The scalar polynomial family driving the escape effect after collapse."""

from functools import lru_cache
from typing import List, Optional, Tuple, Union

import sympy
import torch

from transformers.utils import logging

from ..utils.errors import LevelTooLargeError, ResiduaError
from .linalg import REAL_DTYPE


logger = logging.get_logger(__name__)

t = sympy.Symbol("t")


def _poly(expr) -> sympy.Poly:
    return sympy.Poly(expr, t, domain=sympy.ZZ)


def _next_level(polys: Tuple[sympy.Poly, ...], n_coords: int) -> Tuple[sympy.Poly, ...]:
    # p_{m+1,j} = t prod_{l<j} (1 - p_{m,l}) p_{m,j},  p_{m+1,m+2} = t prod_{l<=m+1} (1 - p_{m,l})
    x, one = _poly(t), _poly(1)
    prefix = one
    out = []
    for p in polys:
        out.append(x * prefix * p)
        prefix = prefix * (one - p)
    if len(out) < n_coords:
        out.append(x * prefix)
    return tuple(out)


@lru_cache(maxsize=None)
def _exact_level(level: int, n_coords: int) -> Tuple[sympy.Poly, ...]:
    if level == 0:
        return (_poly(t),)
    return _next_level(_exact_level(level - 1, n_coords), n_coords)


def evaluate_family(level: int, x: torch.Tensor, n_coords: Optional[int] = None) -> torch.Tensor:
    """
    Values of the leading `n_coords` polynomials of a level at the points `x`, stacked along dim 0.

    The values are produced by running the defining recursion on the points themselves. Expanding the
    coefficients first would cancel catastrophically at high degree.
    """
    n_coords = level + 1 if n_coords is None else min(n_coords, level + 1)
    x = torch.as_tensor(x, dtype=REAL_DTYPE)
    values = [x]
    for _ in range(level):
        prefix = torch.ones_like(x)
        nxt = []
        for v in values:
            nxt.append(x * prefix * v)
            prefix = prefix * (1 - v)
        if len(nxt) < n_coords:
            nxt.append(x * prefix)
        values = nxt
    return torch.stack(values)


def first_closed_form(m: int) -> sympy.Poly:
    return _poly(t ** (m + 1))


def second_closed_form(m: int) -> sympy.Poly:
    return _poly(t**m * sympy.prod([1 - t**ell for ell in range(1, m + 1)]))


class PolyFamily:
    """
    Level `m` of the polynomial family `p_{m,1}, ..., p_{m,m+1}` with exact integer coefficients.

    Args:
        level (`int`):
            The level `m`.
        polys (`Tuple[sympy.Poly, ...]`):
            The leading polynomials of the level, all of them when `complete` is set.
    """

    def __init__(self, level: int, polys: Tuple[sympy.Poly, ...]):
        self.level = level
        self.polys = tuple(polys)

    @property
    def complete(self) -> bool:
        return len(self.polys) == self.level + 1

    def __len__(self):
        return len(self.polys)

    def __repr__(self):
        return f"PolyFamily(level={self.level}, n_coords={len(self.polys)}, complete={self.complete})"

    def poly(self, j: int) -> sympy.Poly:
        if not 1 <= j <= len(self.polys):
            raise IndexError(f"coordinate {j} is not in 1..{len(self.polys)}")
        return self.polys[j - 1]

    def coefficients(self, j: int) -> List[int]:
        """Coefficients of `p_{m,j}` indexed by the power of `t`."""
        return [int(c) for c in reversed(self.poly(j).all_coeffs())]

    def degree(self, j: int) -> int:
        return self.poly(j).degree()

    def exact_value(self, j: int, value: Union[int, str, sympy.Rational]) -> sympy.Rational:
        return self.poly(j).eval(sympy.Rational(value))

    def values(self, x: torch.Tensor) -> torch.Tensor:
        return evaluate_family(self.level, x, len(self.polys))

    def total(self) -> sympy.Poly:
        return sum(self.polys[1:], self.polys[0])

    def is_nonnegative_on_grid(self, points: int = 101, atol: float = 1e-15) -> bool:
        grid = torch.linspace(0.0, 1.0, points, dtype=REAL_DTYPE)
        return bool((self.values(grid) >= -atol).all())


def poly_family(m: int, n_coords: Optional[int] = None, config=None) -> PolyFamily:
    """
    Build level `m` of the polynomial family.

    Args:
        m (`int`):
            The level, `0 <= m <= config.poly_level_cap`.
        n_coords (`int`, *optional*):
            Only build the leading `n_coords` polynomials. The leading polynomials of a level only depend on the
            leading polynomials of the level below, so this stays cheap at levels where the complete family does not.
        config (`ResiduaConfig`, *optional*):
            Supplies `poly_level_cap` and `poly_exact_level_cap`.
    """
    level_cap = config.poly_level_cap if config is not None else 16
    exact_cap = config.poly_exact_level_cap if config is not None else 8
    if m < 0:
        raise ValueError(f"level must be nonnegative, got {m}")
    if m > level_cap:
        raise LevelTooLargeError(f"level {m} is beyond the cap {level_cap}")
    n_coords = m + 1 if n_coords is None else max(1, min(n_coords, m + 1))
    if n_coords == m + 1 and m > exact_cap:
        raise LevelTooLargeError(
            f"the complete family at level {m} is beyond the exact expansion cap {exact_cap}, "
            f"request the leading coordinates with `n_coords` instead"
        )

    family = PolyFamily(m, _exact_level(m, n_coords))

    if family.poly(1) != first_closed_form(m):
        raise ResiduaError(f"p_{{{m},1}} differs from t^{m + 1}")
    if m >= 1 and n_coords >= 2 and family.poly(2) != second_closed_form(m):
        raise ResiduaError(f"p_{{{m},2}} differs from its closed form")
    if family.complete and family.total() != _poly(t):
        raise ResiduaError(f"the level {m} family does not sum to t")
    logger.debug(f"built {family} with top degree {family.degree(len(family))}")
    return family
