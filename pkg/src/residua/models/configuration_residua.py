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
"""Residua configuration"""

import math
import os
from typing import Dict, Optional

from transformers.configuration_utils import PretrainedConfig
from transformers.utils import logging

from ..modules.linalg import Tolerances
from ..utils.errors import InvalidToleranceError


logger = logging.get_logger(__name__)

TOLERANCE_ENV_VAR = "RESIDUA_TOL"
TOLERANCE_FIELDS = ("rank_tol", "kernel_tol", "conv_tol", "check_tol")


def _tolerance_value(text: str, what: str) -> float:
    try:
        tol = float(text)
    except ValueError:
        raise InvalidToleranceError(f"{what} is not a number: {text!r}")
    if not math.isfinite(tol) or not tol > 0:
        raise InvalidToleranceError(f"{what} must be a positive finite number, got {text!r}")
    return tol


def parse_tolerance_override(value: Optional[str]) -> Dict[str, float]:
    """
    Parse the value of `RESIDUA_TOL`.

    Either a single number applied to all four tolerances, or comma separated `name=value` pairs.
    """
    if value is None or not value.strip():
        return {}
    value = value.strip()
    if "=" not in value:
        tol = _tolerance_value(value, TOLERANCE_ENV_VAR)
        return {name: tol for name in TOLERANCE_FIELDS}

    overrides = {}
    for item in value.split(","):
        name, _, number = item.partition("=")
        name = name.strip()
        if name not in TOLERANCE_FIELDS:
            raise InvalidToleranceError(
                f"{TOLERANCE_ENV_VAR} names unknown tolerance {name!r}, expected one of {TOLERANCE_FIELDS}"
            )
        overrides[name] = _tolerance_value(number.strip(), f"{TOLERANCE_ENV_VAR} value of {name}")
    return overrides


class ResiduaConfig(PretrainedConfig):
    r"""
    This is the configuration class that holds every tolerance and numerical knob used by residua. The residual chain,
    the dilation, the residual transform, the collapse map and the post-collapse dynamics all read their thresholds from
    one instance of this class.

    Configuration objects inherit from [`PretrainedConfig`] and can be saved and reloaded as json. Read the
    documentation from [`PretrainedConfig`] for more information.

    Tolerance defaults can be overridden by the `RESIDUA_TOL` environment variable, either with a single number
    (`RESIDUA_TOL=1e-9`) or with `name=value` pairs (`RESIDUA_TOL=check_tol=1e-9,rank_tol=1e-8`). Explicit keyword
    arguments win over the environment.

    Args:
        rank_tol (`float`, *optional*, defaults to 1e-9):
            Relative threshold below which eigenvalues and singular values do not count towards a numerical rank.
        kernel_tol (`float`, *optional*, defaults to 1e-9):
            Relative threshold at or below which an eigenvalue belongs to a kernel.
        conv_tol (`float`, *optional*, defaults to 1e-10):
            Step size below which iterates of the residual transform are declared converged.
        check_tol (`float`, *optional*, defaults to 1e-10):
            Absolute threshold for every identity the library asserts.
        hermitian_tol (`float`, *optional*, defaults to 1e-12):
            Relative threshold of the Hermitian symmetry check.
        effect_tol (`float`, *optional*, defaults to 1e-10):
            Eigenvalues in `[-effect_tol, 0)` and `(1, 1 + effect_tol]` are clamped when building effects.
        factorization_tol (`float`, *optional*, defaults to 1e-8):
            Slack allowed on the spectrum of recovered driving contractions.
        psi_max_steps (`int`, *optional*, defaults to 500):
            Default iteration budget of the residual transform.
        ratio_window (`int`, *optional*, defaults to 10):
            Number of trailing iterations used for the observed convergence ratio.
        poly_level_cap (`int`, *optional*, defaults to 16):
            Largest level of the post-collapse polynomial family.
        poly_exact_level_cap (`int`, *optional*, defaults to 8):
            Largest level for which the complete family is expanded with exact coefficients. The degree of the last
            polynomial grows like the Catalan numbers, higher levels only expand leading coordinates.
        near_pvm_mix (`float`, *optional*, defaults to 0.05):
            Weight of the random part of `near_pvm` instances.
        gen_regularization (`float`, *optional*, defaults to 1e-12):
            Ridge added to the normalizing sum of random instances before the inverse square root.
        coupling_precision (`float`, *optional*, defaults to 1e-10):
            Absolute precision of the coupling bisection.
        prng (`str`, *optional*, defaults to `"mt19937"`):
            Name of the pinned pseudo random generator, the CPU `torch.Generator`.
    """

    model_type = "residua"

    def __init__(
        self,
        rank_tol=None,
        kernel_tol=None,
        conv_tol=None,
        check_tol=None,
        hermitian_tol=1e-12,
        effect_tol=1e-10,
        factorization_tol=1e-8,
        psi_max_steps=500,
        ratio_window=10,
        poly_level_cap=16,
        poly_exact_level_cap=8,
        near_pvm_mix=0.05,
        gen_regularization=1e-12,
        coupling_precision=1e-10,
        prng="mt19937",
        **kwargs,
    ):
        defaults = Tolerances()._asdict()
        defaults.update(parse_tolerance_override(os.environ.get(TOLERANCE_ENV_VAR)))
        self.rank_tol = rank_tol if rank_tol is not None else defaults["rank_tol"]
        self.kernel_tol = kernel_tol if kernel_tol is not None else defaults["kernel_tol"]
        self.conv_tol = conv_tol if conv_tol is not None else defaults["conv_tol"]
        self.check_tol = check_tol if check_tol is not None else defaults["check_tol"]
        self.hermitian_tol = hermitian_tol
        self.effect_tol = effect_tol
        self.factorization_tol = factorization_tol
        self.psi_max_steps = psi_max_steps
        self.ratio_window = ratio_window
        self.poly_level_cap = poly_level_cap
        self.poly_exact_level_cap = poly_exact_level_cap
        self.near_pvm_mix = near_pvm_mix
        self.gen_regularization = gen_regularization
        self.coupling_precision = coupling_precision
        self.prng = prng

        # Validate the tolerances
        for name in TOLERANCE_FIELDS + ("hermitian_tol", "effect_tol", "factorization_tol", "coupling_precision"):
            if not getattr(self, name) > 0:
                raise ValueError(f"`{name}` must be strictly positive, got {getattr(self, name)}")
        if self.poly_exact_level_cap > self.poly_level_cap:
            raise ValueError(
                f"`poly_exact_level_cap` ({self.poly_exact_level_cap}) cannot exceed `poly_level_cap` ({self.poly_level_cap})"
            )
        if not 0.0 <= self.near_pvm_mix <= 1.0:
            raise ValueError(f"`near_pvm_mix` must lie in [0, 1], got {self.near_pvm_mix}")

        super().__init__(**kwargs)

    @property
    def tolerances(self) -> Tolerances:
        return Tolerances(
            rank_tol=self.rank_tol,
            kernel_tol=self.kernel_tol,
            conv_tol=self.conv_tol,
            check_tol=self.check_tol,
        )

    def with_overrides(self, overrides: Optional[Dict[str, float]]) -> "ResiduaConfig":
        """Return a copy with some tolerances replaced, e.g. from a document's `tolerances` record."""
        if not overrides:
            return self
        unknown = set(overrides) - set(TOLERANCE_FIELDS)
        if unknown:
            raise InvalidToleranceError(
                f"unknown tolerance overrides {sorted(unknown)}, expected a subset of {TOLERANCE_FIELDS}"
            )
        values = self.to_dict()
        values.update({name: float(value) for name, value in overrides.items()})
        logger.info(f"Overriding tolerances with {overrides}")
        return self.__class__.from_dict(values)
