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
from typing import TYPE_CHECKING

from transformers.utils import (
    OptionalDependencyNotAvailable,
    _LazyModule,
    is_torch_available,
)


_import_structure = {
}


try:
    if not is_torch_available():
        raise OptionalDependencyNotAvailable()
except OptionalDependencyNotAvailable:
    pass
else:
    _import_structure["linalg"] = [
        "DEFAULT_TOLERANCES",
        "Subspace",
        "Tolerances",
        "as_effect",
        "intersect",
        "joint_kernel_projection",
        "kernel_projection",
        "numerical_rank",
        "psd_sqrt",
        "spectral_apply",
    ]
    _import_structure["chain"] = [
        "Label",
        "OrderedPovm",
        "ResidualChain",
        "recover_contractions",
        "run_chain",
    ]
    _import_structure["polynomials"] = [
        "PolyFamily",
        "evaluate_family",
        "poly_family",
    ]
    _import_structure["generators"] = [
        "GenKind",
        "GenSpec",
        "gen",
    ]


if TYPE_CHECKING:

    try:
        if not is_torch_available():
            raise OptionalDependencyNotAvailable()
    except OptionalDependencyNotAvailable:
        pass
    else:
        from .chain import Label, OrderedPovm, ResidualChain, recover_contractions, run_chain
        from .generators import GenKind, GenSpec, gen
        from .linalg import (
            DEFAULT_TOLERANCES,
            Subspace,
            Tolerances,
            as_effect,
            intersect,
            joint_kernel_projection,
            kernel_projection,
            numerical_rank,
            psd_sqrt,
            spectral_apply,
        )
        from .polynomials import PolyFamily, evaluate_family, poly_family


else:
    import sys

    sys.modules[__name__] = _LazyModule(__name__, globals()["__file__"], _import_structure, module_spec=__spec__)
