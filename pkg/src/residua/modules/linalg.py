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
"""Tolerance-aware dense Hermitian primitives."""

from typing import Callable, NamedTuple, Optional, Sequence

import torch

from ..utils.errors import (
    DimensionMismatchError,
    NotEffectError,
    NotHermitianError,
    NotPsdError,
)

try:
    from einx import multiply as einx_multiply
except ImportError:
    einx_multiply = None


DTYPE = torch.complex128
REAL_DTYPE = torch.float64

HERMITIAN_TOL = 1e-12
EFFECT_TOL = 1e-10


class Tolerances(NamedTuple):
    rank_tol: float = 1e-9
    kernel_tol: float = 1e-9
    conv_tol: float = 1e-10
    check_tol: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(m) -> torch.Tensor:
    """Convert `m` to a square complex128 matrix."""
    m = torch.as_tensor(m)
    if not m.is_complex():
        m = m.to(REAL_DTYPE)
    m = m.to(DTYPE)
    if m.dim() != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {tuple(m.shape)}")
    return m


def identity(dim: int) -> torch.Tensor:
    return torch.eye(dim, dtype=DTYPE)


def zeros(dim: int) -> torch.Tensor:
    return torch.zeros(dim, dim, dtype=DTYPE)


def frobenius(m: torch.Tensor) -> float:
    return torch.linalg.matrix_norm(m).item()


def operator_norm(m: torch.Tensor) -> float:
    if m.numel() == 0:
        return 0.0
    return torch.linalg.matrix_norm(m, ord=2).item()


def hermitian(m, atol: float = HERMITIAN_TOL) -> torch.Tensor:
    """
    Check the Hermitian symmetry of `m` and return its exactly symmetrized copy.

    Args:
        m (`torch.Tensor`):
            Square matrix.
        atol (`float`, *optional*, defaults to 1e-12):
            Allowed asymmetry, relative to `max(1, max-abs-entry)`.
    """
    m = as_matrix(m)
    if m.numel() == 0:
        return m
    scale = max(1.0, m.abs().max().item())
    asymmetry = (m - m.mH).abs().max().item()
    if asymmetry > atol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: asymmetry {asymmetry:.3e} > {atol * scale:.3e}")
    return (m + m.mH) / 2


def _reassemble(values: torch.Tensor, vectors: torch.Tensor) -> torch.Tensor:
    values = values.to(vectors.dtype)
    if einx_multiply is not None:
        scaled = einx_multiply("a b, b -> a b", vectors, values)
    else:
        scaled = vectors * values.unsqueeze(-2)
    out = scaled @ vectors.mH
    return (out + out.mH) / 2


def eigh(m) -> "tuple[torch.Tensor, torch.Tensor]":
    """Eigendecomposition of a Hermitian matrix, ascending real eigenvalues."""
    return torch.linalg.eigh(hermitian(m))


def eigenvalues(m) -> torch.Tensor:
    return torch.linalg.eigvalsh(hermitian(m))


def min_eigenvalue(m) -> float:
    m = as_matrix(m)
    if m.numel() == 0:
        return 0.0
    return eigenvalues(m)[0].item()


def max_eigenvalue(m) -> float:
    m = as_matrix(m)
    if m.numel() == 0:
        return 0.0
    return eigenvalues(m)[-1].item()


def spectral_apply(m, fn: Callable[[torch.Tensor], torch.Tensor]) -> torch.Tensor:
    """
    Functional calculus: apply `fn` to the eigenvalues of the Hermitian matrix `m` and reassemble.

    `fn` receives a real tensor of eigenvalues and may return either a tensor of the same shape or a stacked
    tensor of shape `(k, dim)`, in which case `k` matrices are returned.
    """
    values, vectors = eigh(m)
    mapped = fn(values)
    if mapped.dim() == 1:
        return _reassemble(mapped, vectors)
    return torch.stack([_reassemble(row, vectors) for row in mapped])


def _check_psd(values: torch.Tensor, what: str = "matrix") -> None:
    if values.numel() == 0:
        return
    scale = max(1.0, values.abs().max().item())
    if values[0].item() < -EFFECT_TOL * scale:
        raise NotPsdError(f"{what} is not PSD: eigenvalue {values[0].item():.3e} < {-EFFECT_TOL * scale:.3e}")


def as_effect(m, tol: float = EFFECT_TOL, hermitian_tol: float = HERMITIAN_TOL) -> torch.Tensor:
    """
    Validate `m` as an effect, a PSD contraction. Eigenvalues in `[-tol, 0)` are clamped to 0 and
    eigenvalues in `(1, 1 + tol]` to 1; anything further out is rejected. `hermitian_tol` is the allowed
    relative asymmetry.
    """
    m = hermitian(m, hermitian_tol)
    if m.numel() == 0:
        return m
    values, vectors = torch.linalg.eigh(m)
    low, high = values[0].item(), values[-1].item()
    if low < -tol or high > 1.0 + tol:
        raise NotEffectError(f"spectrum [{low:.3e}, {high:.3e}] is not inside [0, 1] within {tol:.1e}")
    if low < 0.0 or high > 1.0:
        return _reassemble(values.clamp(0.0, 1.0), vectors)
    return m


def psd_sqrt(m) -> torch.Tensor:
    """
    Principal square root of a PSD matrix by Hermitian eigendecomposition.

    Eigenvalues below `dim * eps * max eigenvalue` are rounding noise around zero and are set to zero
    before the root, so that they do not turn into spurious roots of size `sqrt(eps)`.
    """
    values, vectors = eigh(m)
    _check_psd(values)
    if values.numel() == 0:
        return as_matrix(m)
    floor = values.abs().max() * values.shape[-1] * torch.finfo(REAL_DTYPE).eps
    values = torch.where(values > floor, values, torch.zeros_like(values))
    return _reassemble(values.sqrt(), vectors)


def matrix_power(m, exponent: float) -> torch.Tensor:
    """Fractional power of a PSD matrix, with `0 ** 0 = 1` so that `matrix_power(m, 0)` is the identity."""
    values, vectors = eigh(m)
    _check_psd(values)
    floor = values.abs().max() * values.shape[-1] * torch.finfo(REAL_DTYPE).eps
    values = torch.where(values > floor, values, torch.zeros_like(values))
    return _reassemble(values.pow(exponent), vectors)


class Subspace:
    """
    A subspace of C^ambient_dim held as a matrix whose `r` columns are an orthonormal basis.

    Args:
        basis (`torch.Tensor` of shape `(ambient_dim, r)`):
            Orthonormal columns, `r` may be zero.
        ambient_dim (`int`, *optional*):
            Needed only when `basis` is empty and carries no shape information.
    """

    def __init__(self, basis: torch.Tensor, ambient_dim: Optional[int] = None):
        basis = torch.as_tensor(basis).to(DTYPE)
        if basis.dim() != 2:
            raise DimensionMismatchError(f"a subspace basis must be a matrix, got shape {tuple(basis.shape)}")
        if ambient_dim is not None and basis.shape[0] != ambient_dim:
            raise DimensionMismatchError(f"basis has {basis.shape[0]} rows but ambient_dim is {ambient_dim}")
        if basis.shape[1] > basis.shape[0]:
            raise DimensionMismatchError(f"{basis.shape[1]} basis vectors cannot be orthonormal in C^{basis.shape[0]}")
        self.basis = basis

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(torch.zeros(ambient_dim, 0, dtype=DTYPE))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(identity(ambient_dim))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projection(self) -> torch.Tensor:
        return self.basis @ self.basis.mH

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def relative_threshold(values: torch.Tensor, tol: float) -> float:
    if values.numel() == 0:
        return tol
    return tol * max(1.0, values.abs().max().item())


def kernel_basis(m, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Eigenvectors of a PSD matrix whose eigenvalue is at most `kernel_tol * max(1, largest eigenvalue)`."""
    values, vectors = eigh(m)
    _check_psd(values)
    return Subspace(vectors[:, values <= relative_threshold(values, tol.kernel_tol)])


def support_basis(m, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Complement of `kernel_basis`, eigenvectors ordered by ascending eigenvalue."""
    values, vectors = eigh(m)
    _check_psd(values)
    return Subspace(vectors[:, values > relative_threshold(values, tol.kernel_tol)])


def kernel_projection(m, tol: Tolerances = DEFAULT_TOLERANCES) -> torch.Tensor:
    return kernel_basis(m, tol).projection()


def support_projection(m, tol: Tolerances = DEFAULT_TOLERANCES) -> torch.Tensor:
    m = as_matrix(m)
    return identity(m.shape[0]) - kernel_projection(m, tol)


def joint_kernel_projection(
    matrices: Sequence[torch.Tensor],
    tol: Tolerances = DEFAULT_TOLERANCES,
    dim: Optional[int] = None,
) -> torch.Tensor:
    """
    Projection onto the intersection of the kernels of PSD matrices, computed as the kernel of their sum.
    The empty intersection is the whole space, so `dim` is required when `matrices` is empty.
    """
    if len(matrices) == 0:
        if dim is None:
            raise DimensionMismatchError("the joint kernel of an empty list needs an explicit dimension")
        return identity(dim)
    matrices = [as_matrix(m) for m in matrices]
    dims = {m.shape[0] for m in matrices}
    if dim is not None:
        dims.add(dim)
    if len(dims) != 1:
        raise DimensionMismatchError(f"matrices of different dimensions {sorted(dims)}")
    for m in matrices:
        _check_psd(eigenvalues(m))
    return kernel_projection(torch.stack(matrices).sum(0), tol)


def numerical_rank(m, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Number of eigenvalues of the Hermitian matrix `m` with `|lambda| > rank_tol * max(1, max |lambda|)`."""
    m = as_matrix(m)
    if m.numel() == 0:
        return 0
    values = eigenvalues(m)
    return int((values.abs() > relative_threshold(values, tol.rank_tol)).sum().item())


def orthonormal_range(m: torch.Tensor, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Rank-revealing orthonormal basis of the column span of a general matrix, via the SVD."""
    m = torch.as_tensor(m).to(DTYPE)
    if m.dim() != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {tuple(m.shape)}")
    if m.shape[1] == 0 or m.shape[0] == 0:
        return Subspace.zero(m.shape[0])
    u, s, _ = torch.linalg.svd(m, full_matrices=False)
    return Subspace(u[:, s > relative_threshold(s, tol.rank_tol)])


def coordinate_subspace(ambient_dim: int, indices: Sequence[int]) -> Subspace:
    return Subspace(identity(ambient_dim)[:, list(indices)], ambient_dim=ambient_dim)


def intersect(a: Subspace, b: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Intersection of two subspaces as the kernel of `(I - P_a) + (I - P_b)`."""
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError(f"subspaces live in C^{a.ambient_dim} and C^{b.ambient_dim}")
    eye = identity(a.ambient_dim)
    return kernel_basis((eye - a.projection()) + (eye - b.projection()), tol)


def compress(op, s: Subspace) -> torch.Tensor:
    """Matrix of the compression of `op` to `s` in the basis of `s`."""
    op = as_matrix(op)
    if op.shape[0] != s.ambient_dim:
        raise DimensionMismatchError(f"operator on C^{op.shape[0]} cannot be compressed to a subspace of C^{s.ambient_dim}")
    return s.basis.mH @ op @ s.basis


def is_projection_valued(effects: Sequence[torch.Tensor], tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Direct algebraic test: every nonzero coordinate is idempotent and distinct coordinates multiply to zero."""
    nonzero = [as_matrix(e) for e in effects if frobenius(as_matrix(e)) > tol.check_tol]
    for i, a in enumerate(nonzero):
        if frobenius(a @ a - a) > tol.check_tol:
            return False
        for b in nonzero[i + 1:]:
            if frobenius(a @ b) > tol.check_tol:
                return False
    return True
