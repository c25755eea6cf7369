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
    _import_structure["configuration_residua"] = [
        "ResiduaConfig"
    ]
    _import_structure["modeling_dilation"] = [
        "NaimarkDilation",
        "block_compression",
        "build_dilation",
        "compression_defect",
        "dilation_identities",
        "residual_isometry",
        "tail_subspace",
    ]
    _import_structure["modeling_transform"] = [
        "ResidualTransform",
        "gap_report",
        "is_pvm_fixed_point",
        "iterate_psi",
        "psi",
    ]
    _import_structure["modeling_collapse"] = [
        "CollapseMap",
        "CollapsedPovm",
        "CouplingSpec",
        "canonical_preimage",
        "collapse_map",
        "couple_fiber",
        "fiber_membership",
        "is_collapsed",
        "max_coupling",
    ]
    _import_structure["modeling_postcollapse"] = [
        "decay_check",
        "eval_on_effect",
        "psi_on_collapsed_equivalence",
    ]


if TYPE_CHECKING:

    try:
        if not is_torch_available():
            raise OptionalDependencyNotAvailable()
    except OptionalDependencyNotAvailable:
        pass
    else:
        from .configuration_residua import ResiduaConfig
        from .modeling_collapse import (
            CollapsedPovm,
            CollapseMap,
            CouplingSpec,
            canonical_preimage,
            collapse_map,
            couple_fiber,
            fiber_membership,
            is_collapsed,
            max_coupling,
        )
        from .modeling_dilation import (
            NaimarkDilation,
            block_compression,
            build_dilation,
            compression_defect,
            dilation_identities,
            residual_isometry,
            tail_subspace,
        )
        from .modeling_postcollapse import decay_check, eval_on_effect, psi_on_collapsed_equivalence
        from .modeling_transform import ResidualTransform, gap_report, is_pvm_fixed_point, iterate_psi, psi


else:
    import sys

    sys.modules[__name__] = _LazyModule(__name__, globals()["__file__"], _import_structure, module_spec=__spec__)
