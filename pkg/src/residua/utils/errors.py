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
"""Errors raised by residua."""

from typing import Optional


class ResiduaError(ValueError):
    """Base class of every error raised by residua."""


class NotHermitianError(ResiduaError):
    pass


class NotPsdError(ResiduaError):
    pass


class NotEffectError(ResiduaError):
    pass


class DimensionMismatchError(ResiduaError):
    pass


class NotNormalizedError(ResiduaError):
    pass


class FactorizationViolationError(ResiduaError):
    pass


class ChainNotExhaustiveError(ResiduaError):
    pass


class IndexOutOfRangeError(ResiduaError, IndexError):
    pass


class RankIdentityViolationError(ResiduaError):
    """The two integer sides of a rank identity disagree, which means a tolerance failed."""


class IsometryViolationError(ResiduaError):
    pass


class CollapseInvariantViolationError(ResiduaError):
    """A collapsed POVM produced by the collapse formula broke one of its invariants numerically."""


class NotCollapsedError(ResiduaError):
    pass


class InfeasibleCouplingError(ResiduaError):
    pass


class LevelTooLargeError(ResiduaError):
    pass


class SpectralMassAtOneError(ResiduaError):
    pass


class InvalidSpecError(ResiduaError):
    pass


class InvalidToleranceError(ResiduaError):
    """A tolerance override names an unknown tolerance or carries a value that is not a positive number."""


class DocumentError(ResiduaError):
    """
    A document failed to parse or validate.

    Args:
        message (`str`):
            What went wrong.
        line (`int`, *optional*):
            1-based line of the offending text, when known.
        path (`str`, *optional*):
            Location of the offending field, e.g. `effects[1][0][1]`.
    """

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        location = []
        if line is not None:
            location.append(f"line {line}")
        if path is not None:
            location.append(path)
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
