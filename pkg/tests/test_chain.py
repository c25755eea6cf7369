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
import pytest
import torch

from residua.modules.chain import Label, OrderedPovm, recover_contractions, run_chain
from residua.modules.linalg import frobenius, identity
from residua.utils.errors import (
    DimensionMismatchError,
    FactorizationViolationError,
    NotEffectError,
    NotNormalizedError,
)

from .conftest import FAST_SEEDS, diag, mat, random_instance


ATOL = 1e-12


def test_run_chain_on_projections_extracts_them():
    chain = run_chain([diag(1, 0), diag(0, 1)])
    torch.testing.assert_close(chain.extracted[0], diag(1, 0), atol=ATOL, rtol=0)
    torch.testing.assert_close(chain.extracted[1], diag(0, 1), atol=ATOL, rtol=0)
    assert frobenius(chain.residuals[-1]) <= ATOL


def test_run_chain_on_scalars():
    chain = run_chain([mat([[1 / 2]]), mat([[1 / 2]])])
    assert [t.item().real for t in chain.extracted] == pytest.approx([1 / 2, 1 / 4], abs=ATOL)
    assert chain.residuals[-1].item().real == pytest.approx(1 / 4, abs=ATOL)
    assert chain.partition_residual() <= ATOL


def test_run_chain_first_step(noncommuting_three):
    chain = run_chain(noncommuting_three.effects)
    torch.testing.assert_close(chain.extracted[0], noncommuting_three.effects[0], atol=ATOL, rtol=0)
    torch.testing.assert_close(chain.residuals[1], diag(3 / 5, 1), atol=ATOL, rtol=0)


def test_run_chain_validates_drivers():
    with pytest.raises(DimensionMismatchError):
        run_chain([identity(2), identity(3)])
    with pytest.raises(NotEffectError):
        run_chain([diag(2.0, 0.0)])


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_run_chain_partition_identity(seed):
    p = random_instance(seed)
    chain = run_chain(p.effects)
    assert chain.partition_residual() <= 1e-10


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_commuting_drivers_follow_the_scalar_formula(seed):
    weights = torch.rand(3, 4, generator=torch.Generator().manual_seed(seed), dtype=torch.float64)
    drivers = [torch.diag(w).to(torch.complex128) for w in weights]
    chain = run_chain(drivers)
    survived = torch.ones(4, dtype=torch.float64)
    for w, t in zip(weights, chain.extracted):
        torch.testing.assert_close(torch.diagonal(t).real, w * survived, atol=1e-10, rtol=0)
        survived = survived * (1 - w)


def test_recover_contractions_scalar():
    p = OrderedPovm([mat([[1 / 2]]), mat([[1 / 4]]), mat([[1 / 4]])])
    contractions = recover_contractions(p)
    assert [a.item().real for a in contractions] == pytest.approx([1 / 2, 1 / 2, 1.0], abs=1e-12)


def test_recover_contractions_projections():
    p = OrderedPovm([diag(1, 0, 0), diag(0, 1, 1)])
    contractions = recover_contractions(p)
    torch.testing.assert_close(contractions[0], diag(1, 0, 0), atol=ATOL, rtol=0)
    torch.testing.assert_close(contractions[1], diag(0, 1, 1), atol=ATOL, rtol=0)


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_recover_then_run_reproduces_the_povm(seed):
    p = random_instance(seed)
    chain = run_chain(recover_contractions(p))
    for t, e in zip(chain.extracted, p.effects):
        assert frobenius(t - e) <= 1e-8


def test_recover_contractions_rejects_domination_failure():
    # tampered after construction: the second coordinate is no longer dominated by the first residual
    p = OrderedPovm([diag(1, 0), diag(0, 1)])
    p.effects[1] = diag(0.5, 1.0)
    with pytest.raises(FactorizationViolationError):
        recover_contractions(p)


def test_ordered_povm_checks_normalization_and_labels():
    with pytest.raises(NotNormalizedError):
        OrderedPovm([diag(1 / 2, 1 / 2)])
    with pytest.raises(ValueError):
        OrderedPovm([diag(1, 0), diag(0, 1)], labels=["term:1", "orig:1"])
    with pytest.raises(ValueError):
        OrderedPovm([diag(1, 0), diag(0, 1)], labels=["orig:2", "orig:1"])


def test_ordered_povm_splits_originals_and_terminals():
    p = OrderedPovm([diag(1 / 2, 0), diag(0, 1 / 2), diag(1 / 2, 1 / 2)], labels=["orig:1", "orig:2", "term:3"])
    assert len(p.originals()) == 2
    assert len(p.terminals()) == 1
    assert p.next_terminal_step() == 4
    assert str(p.labels[2]) == "term:3"


def test_label_parse():
    assert Label.parse("orig:2") == Label.original(2)
    assert Label.parse("term:1") == Label.terminal(1)
    for text in ("orig", "x:1", "orig:a", "term:0"):
        with pytest.raises(ValueError):
            Label.parse(text)
