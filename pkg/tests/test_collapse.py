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
import math

import pytest
import torch

from residua.models.modeling_collapse import (
    CollapsedPovm,
    CollapseMap,
    CouplingSpec,
    canonical_preimage,
    collapse_limit_is_normalized,
    collapse_map,
    couple_fiber,
    escape_has_no_unit_eigenvalue,
    fiber_membership,
    is_collapsed,
    max_coupling,
)
from residua.models.modeling_transform import iterate_psi
from residua.modules.chain import OrderedPovm
from residua.modules.generators import GenSpec, gen
from residua.modules.linalg import eigh, frobenius, identity, zeros
from residua.utils.documents import PovmDocument
from residua.utils.errors import (
    DimensionMismatchError,
    InfeasibleCouplingError,
    NotCollapsedError,
    NotNormalizedError,
)

from .conftest import FAST_SEEDS, FIXTURES, SWEEP_SEEDS, diag, mat, random_instance


ATOL = 1e-10

P1 = diag(1, 0)
P2 = diag(0, 1)


def halves_collapsed():
    return CollapsedPovm([P1 / 2, P2 / 2, zeros(2)], identity(2) / 2)


def assert_same_collapse(b, c, atol=ATOL):
    n = max(len(b), len(c))
    for x, y in zip(b.padded(n), c.padded(n)):
        torch.testing.assert_close(x, y, atol=atol, rtol=0)
    torch.testing.assert_close(b.b_esc, c.b_esc, atol=atol, rtol=0)


def test_collapse_noncommuting_three(noncommuting_three, config):
    b = collapse_map(noncommuting_three, config)
    torch.testing.assert_close(b.b[0], diag(2 / 5, 0), atol=1e-12, rtol=0)
    torch.testing.assert_close(b.b[1], diag(0, 3 / 10), atol=1e-12, rtol=0)
    assert frobenius(b.b[2]) <= 1e-12
    torch.testing.assert_close(b.b_esc, diag(3 / 5, 7 / 10), atol=1e-12, rtol=0)
    assert not collapse_limit_is_normalized(b, config)
    assert escape_has_no_unit_eigenvalue(b, config)


def test_fiber_pair_share_their_collapse(fiber_pair, config):
    a, a_prime = fiber_pair
    expected = halves_collapsed()
    assert_same_collapse(collapse_map(a, config), expected)
    assert_same_collapse(collapse_map(a_prime, config), expected)


def test_collapse_of_a_pvm_is_the_pvm(config):
    b = collapse_map(OrderedPovm([P1, P2]), config)
    assert_same_collapse(b, CollapsedPovm([P1, P2], zeros(2)))
    assert collapse_limit_is_normalized(b, config)


def test_collapse_folds_terminals_into_the_escape(config):
    p = OrderedPovm([diag(1 / 4, 0), diag(1 / 4, 1 / 2), diag(1 / 2, 1 / 2)], ["orig:1", "term:1", "term:2"])
    b = collapse_map(p, config)
    assert len(b) == 1
    torch.testing.assert_close(b.b_esc, diag(3 / 4, 1), atol=1e-12, rtol=0)
    # terminal mass leaves a common kernel of the originals, reported but accepted
    assert not is_collapsed(b, config).is_collapsed


def test_collapsed_povm_structure():
    b = halves_collapsed()
    assert len(b) == 3
    torch.testing.assert_close(b.supports[0], P1, atol=1e-12, rtol=0)
    torch.testing.assert_close(b.leftovers[1], P2 / 2, atol=1e-12, rtol=0)
    torch.testing.assert_close(b.filtration_at(0), identity(2), atol=0, rtol=0)
    torch.testing.assert_close(b.filtration_at(1), P2, atol=1e-12, rtol=0)
    assert frobenius(b.filtration_at(2)) <= 1e-12
    assert frobenius(b.filtration_at(7)) <= 1e-12
    assert [str(label) for label in b.to_povm().labels] == ["orig:1", "orig:2", "orig:3", "term:1"]


def test_collapsed_povm_validation():
    with pytest.raises(NotNormalizedError):
        CollapsedPovm([P1 / 2], identity(2) / 4)
    with pytest.raises(DimensionMismatchError):
        CollapsedPovm([], identity(2))
    with pytest.raises(DimensionMismatchError):
        CollapsedPovm([P1], zeros(3))


def test_collapsed_povm_from_document(fiber_pair, config):
    document = PovmDocument.read(FIXTURES / "fiber_pair_collapsed.json")
    b = CollapsedPovm.from_povm(document.to_povm(config.check_tol))
    assert_same_collapse(b, halves_collapsed())
    assert_same_collapse(collapse_map(fiber_pair[0], config), b)


def test_is_collapsed_failures(config):
    check = is_collapsed(CollapsedPovm([identity(2) / 2, identity(2) / 2], zeros(2)), config)
    assert not check.is_collapsed
    assert check.worst_pair == (1, 2)
    assert check.worst_product == pytest.approx(math.sqrt(2) / 4, abs=1e-12)

    check = is_collapsed(CollapsedPovm([P1 / 2], identity(2) - P1 / 2), config)
    assert not check.is_collapsed
    assert check.worst_pair is None
    assert check.support_defect == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_collapse_outputs_are_collapsed(seed, config):
    b = collapse_map(random_instance(seed), config)
    check = is_collapsed(b, config)
    assert check.is_collapsed
    assert check.escape_identity_residual <= ATOL
    coordinates = b.b + [b.b_esc]
    for x in coordinates:
        for y in coordinates:
            assert frobenius(x @ y - y @ x) <= ATOL
    assert escape_has_no_unit_eigenvalue(b, config)


@pytest.mark.parametrize("kind", ["random", "pvm", "commuting", "near_pvm"])
@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_canonical_preimage_roundtrip(seed, kind, config):
    b = collapse_map(random_instance(seed, kind), config)
    preimage = canonical_preimage(b, config)
    assert_same_collapse(collapse_map(preimage, config), b)
    assert fiber_membership(preimage, b, config).is_member


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_canonical_preimage_of_generated_collapsed(seed, config):
    dim, n = 2 + seed % 4, 3 + seed % 3
    b = gen(GenSpec(dim=dim, n_effects=n, kind="collapsed", seed=seed), config)
    assert is_collapsed(b, config).is_collapsed
    assert_same_collapse(collapse_map(canonical_preimage(b, config), config), b)


def test_canonical_preimage_cases(config):
    preimage = canonical_preimage(halves_collapsed(), config)
    assert [str(label) for label in preimage.labels] == ["orig:1", "orig:2", "orig:3"]
    for got, expected in zip(preimage.effects, [P1 / 2, identity(2) / 2, P2 / 2]):
        torch.testing.assert_close(got, expected, atol=1e-12, rtol=0)

    pvm = canonical_preimage(CollapsedPovm([P1, P2], zeros(2)), config)
    assert len(pvm) == 2
    torch.testing.assert_close(pvm.effects[1], P2, atol=1e-12, rtol=0)

    with pytest.raises(NotCollapsedError):
        canonical_preimage(CollapsedPovm([P1 / 2], identity(2) - P1 / 2), config)


def test_canonical_preimage_closes_with_the_last_leftover(config):
    preimage = canonical_preimage(CollapsedPovm([P1 / 2, P2 / 2], identity(2) / 2), config)
    assert [str(label) for label in preimage.labels] == ["orig:1", "orig:2", "term:1"]
    torch.testing.assert_close(preimage.effects[-1], P2 / 2, atol=1e-12, rtol=0)


def test_fiber_membership_cases(fiber_pair, config):
    a, a_prime = fiber_pair
    b = halves_collapsed()
    assert fiber_membership(a, b, config).is_member
    assert fiber_membership(a_prime, b, config).is_member

    perturbed = CollapsedPovm([P1 * 2 / 5, P2 / 2, zeros(2)], identity(2) - P1 * 2 / 5 - P2 / 2)
    report = fiber_membership(a, perturbed, config)
    assert not report.is_member
    assert not report.collapse_agrees
    assert report.compression_distances[0] == pytest.approx(1 / 10, abs=1e-12)

    with pytest.raises(DimensionMismatchError):
        fiber_membership(a, CollapsedPovm([diag(1, 0, 0)], diag(0, 1, 1)), config)


@pytest.mark.slow
@pytest.mark.parametrize("seed", SWEEP_SEEDS)
def test_fiber_membership_sweep(seed, config):
    p = random_instance(seed, "random" if seed % 2 else "near_pvm")
    report = fiber_membership(p, collapse_map(p, config), config)
    assert report.is_member and report.collapse_agrees


@pytest.mark.parametrize("seed", FAST_SEEDS)
def test_small_visible_perturbation_leaves_the_fiber(seed, config):
    p = random_instance(seed)
    b = collapse_map(p, config)
    assert fiber_membership(p, b, config).is_member

    # move 1e-3 of weight from the top eigenvector of the largest later coordinate into the first one
    donor = max(range(1, len(p)), key=lambda k: eigh(p.effects[k])[0][-1].item())
    values, vectors = eigh(p.effects[donor])
    assert values[-1].item() >= 1e-3
    bump = 1e-3 * vectors[:, -1:] @ vectors[:, -1:].mH
    effects = list(p.effects)
    effects[0] = effects[0] + bump
    effects[donor] = effects[donor] - bump
    perturbed = OrderedPovm(effects, p.labels)

    report = fiber_membership(perturbed, b, config)
    assert not report.is_member
    assert not report.collapse_agrees


def test_couple_fiber_rebuilds_the_pair(fiber_pair, config):
    _, a_prime = fiber_pair
    spec = CouplingSpec(diag(1 / 4, 0), mat([[0, 0], [1 / 4, 0]]))
    coupled = couple_fiber(halves_collapsed(), spec, config)
    assert len(coupled) == 3
    for got, expected in zip(coupled.effects, a_prime.effects):
        torch.testing.assert_close(got, expected, atol=1e-12, rtol=0)


def test_zero_coupling_gives_a_diagonal_member(config):
    b = halves_collapsed()
    coupled = couple_fiber(b, CouplingSpec(b.leftovers[0] / 2, zeros(2)), config)
    torch.testing.assert_close(coupled.effects[1], diag(1 / 4, 1 / 2), atol=1e-12, rtol=0)
    torch.testing.assert_close(coupled.effects[2], diag(1 / 4, 1 / 2), atol=1e-12, rtol=0)
    assert fiber_membership(coupled, b, config).is_member


def test_couple_fiber_rejects_infeasible_blocks(config):
    b = halves_collapsed()
    with pytest.raises(InfeasibleCouplingError):
        couple_fiber(b, CouplingSpec(diag(1, 0), zeros(2)), config)
    with pytest.raises(InfeasibleCouplingError):
        couple_fiber(b, CouplingSpec(diag(0, 1 / 4), zeros(2)), config)
    with pytest.raises(InfeasibleCouplingError):
        couple_fiber(b, CouplingSpec(diag(1 / 4, 0), mat([[0, 0], [1, 0]])), config)
    with pytest.raises(InfeasibleCouplingError):
        couple_fiber(CollapsedPovm([P1 / 2, P2 / 2], identity(2) / 2), CouplingSpec(zeros(2), zeros(2)), config)
    with pytest.raises(NotCollapsedError):
        couple_fiber(CollapsedPovm([P1 / 2, P1 / 2, zeros(2)], P2), CouplingSpec(zeros(2), zeros(2)), config)


def sector_vector(support: torch.Tensor) -> torch.Tensor:
    values, vectors = eigh(support)
    return vectors[:, -1:]


@pytest.mark.parametrize(
    "seed", [seed if seed in FAST_SEEDS else pytest.param(seed, marks=pytest.mark.slow) for seed in range(50)]
)
def test_coupling_at_half_the_maximum(seed, config):
    dim, n = 2 + seed % 4, 3 + seed % 2
    b = gen(GenSpec(dim=dim, n_effects=n, kind="collapsed", seed=seed), config)
    first, second = sector_vector(b.supports[0]), sector_vector(b.supports[1])
    direction = second @ first.mH
    c_block = b.leftovers[0] / 2
    sigma = max_coupling(b, direction, c_block, config)
    assert sigma > 0

    coupled = couple_fiber(b, CouplingSpec(c_block, sigma / 2 * direction), config)
    assert fiber_membership(coupled, b, config).is_member
    assert frobenius(b.supports[1] @ coupled.effects[1] @ b.supports[0]) > 1e-6
    assert frobenius(coupled.effects[1] - canonical_preimage(b, config).effects[1]) > 1e-6


def scalar_sectors():
    return CollapsedPovm([diag(3 / 4, 0), diag(0, 1 / 2)], diag(1 / 4, 1 / 2))


def test_max_coupling_scalar_sectors(config):
    direction = mat([[0, 0], [1, 0]])
    sigma = max_coupling(scalar_sectors(), direction, diag(1 / 8, 0), config)
    assert sigma == pytest.approx(1 / 4, abs=1e-9)


def test_max_coupling_is_largest_inside(config):
    direction = mat([[0, 0], [1, 0]])
    grid = [k / 64 for k in range(1, 16)]
    values = [max_coupling(scalar_sectors(), direction, diag(c, 0), config) for c in grid]
    best = max(range(len(grid)), key=values.__getitem__)
    assert 0 < best < len(grid) - 1
    assert grid[best] == pytest.approx(1 / 8)


def test_max_coupling_without_leftover(config):
    b = CollapsedPovm([P1, P2 / 2], P2 / 2)
    assert max_coupling(b, mat([[0, 0], [1, 0]]), zeros(2), config) == 0.0
    with pytest.raises(ValueError):
        max_coupling(b, zeros(2), zeros(2), config)


@pytest.mark.parametrize("name", ["noncommuting_three", "a", "a_prime"])
def test_collapse_targets_are_iteration_limits(name, noncommuting_three, fiber_pair, config):
    p = {"noncommuting_three": noncommuting_three, "a": fiber_pair[0], "a_prime": fiber_pair[1]}[name]
    iterate, report = iterate_psi(p, m_max=500, config=config, track_terminals=False)
    assert report.converged
    for x, y in zip(iterate.povm.originals(), collapse_map(p, config).b):
        assert frobenius(x - y) <= 1e-6


def test_collapse_module_repr(config):
    assert "kernel_tol" in repr(CollapseMap(config))
