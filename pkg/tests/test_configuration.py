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

from residua.models.configuration_residua import TOLERANCE_ENV_VAR, ResiduaConfig, parse_tolerance_override
from residua.models.modeling_dilation import build_dilation, dilation_identities
from residua.modules.linalg import Tolerances, identity
from residua.utils.errors import InvalidToleranceError, NotHermitianError, ResiduaError

from .conftest import mat


def test_defaults(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)
    config = ResiduaConfig()
    assert config.tolerances == Tolerances(rank_tol=1e-9, kernel_tol=1e-9, conv_tol=1e-10, check_tol=1e-10)
    assert config.psi_max_steps == 500
    assert config.poly_level_cap == 16
    assert config.model_type == "residua"


def test_single_number_from_the_environment(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "1e-7")
    assert ResiduaConfig().tolerances == Tolerances(1e-7, 1e-7, 1e-7, 1e-7)


def test_named_values_from_the_environment(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "check_tol=1e-8, rank_tol=1e-6")
    config = ResiduaConfig()
    assert config.check_tol == 1e-8
    assert config.rank_tol == 1e-6
    assert config.kernel_tol == 1e-9


def test_keyword_arguments_win_over_the_environment(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "1e-7")
    assert ResiduaConfig(check_tol=1e-12).check_tol == 1e-12


@pytest.mark.parametrize("value", ["tight", "check_tol=x", "speed=1e-3", "-1e-9", "check_tol=nan", "rank_tol=0"])
def test_malformed_environment(value):
    with pytest.raises(InvalidToleranceError):
        parse_tolerance_override(value)


def test_malformed_environment_is_a_residua_error(monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV_VAR, "tight")
    with pytest.raises(ResiduaError):
        ResiduaConfig()


def test_empty_environment():
    assert parse_tolerance_override(None) == {}
    assert parse_tolerance_override("  ") == {}


def test_with_overrides(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)
    config = ResiduaConfig(psi_max_steps=50)
    assert config.with_overrides({}) is config
    updated = config.with_overrides({"check_tol": 1e-6})
    assert updated.check_tol == 1e-6
    assert updated.psi_max_steps == 50
    assert config.check_tol == 1e-10
    with pytest.raises(InvalidToleranceError):
        config.with_overrides({"effect_tol": 1e-3})


@pytest.mark.parametrize(
    "kwargs",
    [
        {"check_tol": 0.0},
        {"factorization_tol": -1e-8},
        {"poly_level_cap": 6, "poly_exact_level_cap": 8},
        {"near_pvm_mix": 1.5},
    ],
)
def test_invalid_values(kwargs):
    with pytest.raises(ValueError):
        ResiduaConfig(**kwargs)


def test_dict_roundtrip(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)
    config = ResiduaConfig(rank_tol=1e-8, ratio_window=4)
    restored = ResiduaConfig.from_dict(config.to_dict())
    assert restored.rank_tol == 1e-8
    assert restored.ratio_window == 4


def test_hermitian_tol_reaches_effect_validation(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV_VAR, raising=False)
    skewed = mat([[0.5, 0.25 + 1e-10], [0.25, 0.5]])
    with pytest.raises(NotHermitianError):
        build_dilation([skewed, identity(2)], ResiduaConfig())

    dilation = build_dilation([skewed, identity(2)], ResiduaConfig(hermitian_tol=1e-8))
    assert dilation_identities(dilation).isometry_residual <= 1e-10
