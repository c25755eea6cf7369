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

from residua.modules.linalg import (
    Subspace,
    as_effect,
    compress,
    coordinate_subspace,
    hermitian,
    identity,
    intersect,
    is_projection_valued,
    joint_kernel_projection,
    kernel_projection,
    matrix_power,
    numerical_rank,
    orthonormal_range,
    psd_sqrt,
    spectral_apply,
    support_projection,
    zeros,
)
from residua.utils.errors import DimensionMismatchError, NotEffectError, NotHermitianError, NotPsdError

from .conftest import diag, mat


ATOL = 1e-12


def test_psd_sqrt_identity_and_diagonal():
    torch.testing.assert_close(psd_sqrt(identity(3)), identity(3), atol=ATOL, rtol=0)
    torch.testing.assert_close(
        psd_sqrt(diag(3 / 5, 7 / 10)), diag(math.sqrt(3 / 5), math.sqrt(7 / 10)), atol=ATOL, rtol=0
    )


def test_psd_sqrt_squares_back():
    m = mat([[1 / 4, 1 / 4], [1 / 4, 1 / 2]])
    root = psd_sqrt(m)
    assert torch.linalg.matrix_norm(root @ root - m).item() <= ATOL
    torch.testing.assert_close(root, root.mH, atol=ATOL, rtol=0)


def test_psd_sqrt_rejects_negative_eigenvalue():
    with pytest.raises(NotPsdError):
        psd_sqrt(diag(1.0, -1e-3))


def test_hermitian_rejects_asymmetry():
    with pytest.raises(NotHermitianError):
        hermitian(mat([[0.0, 1.0], [0.0, 0.0]]))


def test_as_effect_clamps_only_inside_the_window():
    clamped = as_effect(diag(-1e-12, 1.0 + 1e-12))
    torch.testing.assert_close(clamped, diag(0.0, 1.0), atol=1e-15, rtol=0)
    with pytest.raises(NotEffectError):
        as_effect(diag(-1e-3, 0.5))
    with pytest.raises(NotEffectError):
        as_effect(diag(0.5, 1.01))


def test_kernel_projection_cases(noncommuting_three):
    a_1, a_2, _ = noncommuting_three.effects
    torch.testing.assert_close(kernel_projection(diag(2 / 5, 0)), diag(0, 1), atol=ATOL, rtol=0)
    torch.testing.assert_close(kernel_projection(identity(3)), zeros(3), atol=ATOL, rtol=0)
    torch.testing.assert_close(kernel_projection(a_1 + a_2), zeros(2), atol=ATOL, rtol=0)


def test_joint_kernel_projection_cases(noncommuting_three):
    a_1, a_2, _ = noncommuting_three.effects
    torch.testing.assert_close(joint_kernel_projection([], dim=2), identity(2), atol=0, rtol=0)
    torch.testing.assert_close(joint_kernel_projection([a_1]), diag(0, 1), atol=ATOL, rtol=0)
    torch.testing.assert_close(joint_kernel_projection([a_1, a_2]), zeros(2), atol=ATOL, rtol=0)


def test_joint_kernel_projection_needs_dimension_or_matching_shapes():
    with pytest.raises(DimensionMismatchError):
        joint_kernel_projection([])
    with pytest.raises(DimensionMismatchError):
        joint_kernel_projection([identity(2), identity(3)])


def test_support_projection_cases():
    torch.testing.assert_close(support_projection(diag(2 / 5, 0)), diag(1, 0), atol=ATOL, rtol=0)
    torch.testing.assert_close(support_projection(zeros(2)), zeros(2), atol=ATOL, rtol=0)
    torch.testing.assert_close(
        support_projection(mat([[1 / 4, 1 / 4], [1 / 4, 1 / 2]])), identity(2), atol=ATOL, rtol=0
    )


def test_numerical_rank_cases():
    assert numerical_rank(zeros(3)) == 0
    p = diag(1, 0, 1)
    assert numerical_rank(p - p @ p) == 0
    c = mat([[1 / 2]])
    assert numerical_rank(c - c @ c) == 1


def test_intersect_cases():
    diagonal = Subspace(mat([[1.0], [1.0]]) / math.sqrt(2))
    assert intersect(diagonal, coordinate_subspace(2, [1])).dim == 0

    meet = intersect(coordinate_subspace(3, [0, 1]), coordinate_subspace(3, [1, 2]))
    assert meet.dim == 1
    torch.testing.assert_close(meet.projection(), diag(0, 1, 0), atol=ATOL, rtol=0)


def test_compress_cases():
    s = Subspace(mat([[1.0], [1.0]]) / math.sqrt(2))
    torch.testing.assert_close(compress(identity(2), s), identity(1), atol=ATOL, rtol=0)
    torch.testing.assert_close(compress(diag(0, 1), s), mat([[1 / 2]]), atol=ATOL, rtol=0)

    alpha, beta = 3.0, 4.0
    line = Subspace(mat([[alpha], [beta]]) / 5.0)
    torch.testing.assert_close(compress(diag(1, 0), line), mat([[alpha**2 / 25.0]]), atol=ATOL, rtol=0)

    with pytest.raises(DimensionMismatchError):
        compress(identity(3), s)


def test_intersect_rejects_different_ambient_spaces():
    with pytest.raises(DimensionMismatchError):
        intersect(Subspace.full(2), Subspace.full(3))


def test_orthonormal_range_of_rank_one_rectangle():
    m = torch.tensor([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]], dtype=torch.complex128)
    span = orthonormal_range(m)
    assert span.dim == 1
    torch.testing.assert_close(span.basis.mH @ span.basis, identity(1), atol=ATOL, rtol=0)


def test_spectral_apply_stacked_outputs_reassemble_each_function():
    m = diag(1 / 4, 3 / 4)
    out = spectral_apply(m, lambda v: torch.stack([v.square(), v * (1 - v)]))
    assert out.shape == (2, 2, 2)
    torch.testing.assert_close(out[0], diag(1 / 16, 9 / 16), atol=ATOL, rtol=0)
    torch.testing.assert_close(out.sum(0), m, atol=ATOL, rtol=0)


def test_matrix_power_zero_exponent_is_identity():
    torch.testing.assert_close(matrix_power(diag(0.5, 0.0), 0.0), identity(2), atol=ATOL, rtol=0)
    torch.testing.assert_close(matrix_power(diag(0.25, 0.0), 0.5), diag(0.5, 0.0), atol=ATOL, rtol=0)


def test_is_projection_valued():
    assert is_projection_valued([diag(1, 0), diag(0, 1)])
    assert not is_projection_valued([diag(0.5, 0), diag(0.5, 1)])
    assert not is_projection_valued([diag(1, 0), diag(1, 0)])
