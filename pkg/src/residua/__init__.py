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


__version__ = "0.1.0"

_import_structure = {
    "utils.errors": [
        "DocumentError",
        "ResiduaError",
    ],
}


try:
    if not is_torch_available():
        raise OptionalDependencyNotAvailable()
except OptionalDependencyNotAvailable:
    pass
else:
    _import_structure["models.configuration_residua"] = [
        "ResiduaConfig"
    ]
    _import_structure["modules.chain"] = [
        "Label",
        "OrderedPovm",
        "run_chain",
    ]
    _import_structure["modules.generators"] = [
        "GenKind",
        "GenSpec",
        "gen",
    ]
    _import_structure["modules.polynomials"] = [
        "poly_family",
    ]
    _import_structure["models.modeling_dilation"] = [
        "build_dilation",
    ]
    _import_structure["models.modeling_transform"] = [
        "ResidualTransform",
        "iterate_psi",
        "psi",
    ]
    _import_structure["models.modeling_collapse"] = [
        "CollapsedPovm",
        "collapse_map",
    ]
    _import_structure["utils.documents"] = [
        "MatrixDocument",
        "PovmDocument",
    ]


if TYPE_CHECKING:
    from .utils.errors import DocumentError, ResiduaError

    try:
        if not is_torch_available():
            raise OptionalDependencyNotAvailable()
    except OptionalDependencyNotAvailable:
        pass
    else:
        from .models.configuration_residua import ResiduaConfig
        from .models.modeling_collapse import CollapsedPovm, collapse_map
        from .models.modeling_dilation import build_dilation
        from .models.modeling_transform import ResidualTransform, iterate_psi, psi
        from .modules.chain import Label, OrderedPovm, run_chain
        from .modules.generators import GenKind, GenSpec, gen
        from .modules.polynomials import poly_family
        from .utils.documents import MatrixDocument, PovmDocument


else:
    import sys

    sys.modules[__name__] = _LazyModule(
        __name__,
        globals()["__file__"],
        _import_structure,
        module_spec=__spec__,
        extra_objects={"__version__": __version__},
    )
