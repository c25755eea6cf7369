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
from pathlib import Path

import pytest
import torch

import residua
from residua.models.configuration_residua import ResiduaConfig
from residua.modules.chain import OrderedPovm
from residua.modules.generators import GenSpec, gen
from residua.modules.linalg import DTYPE


FIXTURES = Path(residua.__file__).resolve().parent / "fixtures"

FAST_SEEDS = list(range(20))
SWEEP_SEEDS = list(range(200))


def mat(rows) -> torch.Tensor:
    return torch.tensor(rows, dtype=DTYPE)


def diag(*values) -> torch.Tensor:
    return torch.diag(torch.tensor(values, dtype=DTYPE))


def instance_shape(seed: int, max_dim: int = 6, max_n: int = 6):
    """Deterministic `(dim, n_effects)` for a sweep seed."""
    return 1 + seed % max_dim, 2 + (seed // max_dim) % (max_n - 1)


def random_instance(seed: int, kind: str = "random", max_dim: int = 6, max_n: int = 6, config=None):
    dim, n = instance_shape(seed, max_dim, max_n)
    if kind in ("pvm", "near_pvm"):
        n = min(n, dim)
    return gen(GenSpec(dim=dim, n_effects=n, kind=kind, seed=seed), config)


@pytest.fixture
def config():
    return ResiduaConfig()


@pytest.fixture
def noncommuting_three():
    """`A_1 = diag(2/5, 0)`, `A_2 = [[1/10, 1/10], [1/10, 3/10]]`, `A_3 = I - A_1 - A_2`."""
    return OrderedPovm(
        [
            diag(2 / 5, 0),
            mat([[1 / 10, 1 / 10], [1 / 10, 3 / 10]]),
            mat([[1 / 2, -1 / 10], [-1 / 10, 7 / 10]]),
        ]
    )


@pytest.fixture
def fiber_pair():
    """Two different ordered POVMs on C^2 with the same collapse `(P_1 / 2, P_2 / 2, 0, I / 2)`."""
    a = OrderedPovm([diag(1 / 2, 0), diag(0, 1 / 2), diag(1 / 2, 1 / 2)])
    a_prime = OrderedPovm(
        [
            diag(1 / 2, 0),
            mat([[1 / 4, 1 / 4], [1 / 4, 1 / 2]]),
            mat([[1 / 4, -1 / 4], [-1 / 4, 1 / 2]]),
        ]
    )
    return a, a_prime


@pytest.fixture
def scalar_halves():
    return OrderedPovm([mat([[1 / 2]]), mat([[1 / 2]])])
