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
"""
Text documents read and written by the command line: ordered POVMs, single matrices and reports.

Documents are JSON. Floats are written with 17 significant digits so that reading a written document gives back
the same binary64 values and writing it again gives back the same text.
"""

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import torch

from transformers.utils import logging

from ..modules.chain import Label, OrderedPovm
from ..modules.linalg import DTYPE, HERMITIAN_TOL, Tolerances
from .errors import DocumentError, ResiduaError


logger = logging.get_logger(__name__)

SCHEMA_VERSION = "1"
FLOAT_FORMAT = ".17g"
INDENT = "  "


def _parse_int(text: str):
    # keep the sign of a written negative zero
    return -0.0 if text == "-0" else int(text)


def _reject_constant(name: str):
    raise DocumentError(f"non-finite number {name} is not allowed")


def loads(text: str) -> Any:
    try:
        return json.loads(text, parse_int=_parse_int, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno)


def load(path: Union[str, os.PathLike]) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e.strerror}")
    return loads(text)


def _scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DocumentError(f"non-finite number {value} cannot be written")
        return format(value, FLOAT_FORMAT)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _encode(value, depth: int) -> str:
    pad, inner = INDENT * depth, INDENT * (depth + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(key))}: {_encode(item, depth + 1)}" for key, item in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(item, (dict, list, tuple)) for item in value):
            return "[" + ", ".join(_scalar(item) for item in value) + "]"
        # a row of [re, im] pairs stays on one line
        if all(isinstance(item, (list, tuple)) and all(not isinstance(x, (dict, list, tuple)) for x in item) for item in value):
            return "[" + ", ".join(_encode(item, depth + 1) for item in value) + "]"
        return "[\n" + ",\n".join(f"{inner}{_encode(item, depth + 1)}" for item in value) + f"\n{pad}]"
    return _scalar(value)


def dumps(document: Any) -> str:
    """Deterministic text of a document, keys in insertion order."""
    return _encode(document, 0) + "\n"


def dump(document: Any, path: Optional[Union[str, os.PathLike]] = None) -> str:
    text = dumps(document)
    if path is not None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"wrote {path}")
    return text


def encode_matrix(m: torch.Tensor) -> List[List[List[float]]]:
    m = torch.as_tensor(m).to(DTYPE)
    return [[[float(z.real), float(z.imag)] for z in row.tolist()] for row in m]


def _finite_float(x: Any, path: str) -> float:
    try:
        value = float(x)
    except OverflowError:
        raise DocumentError("number is out of the binary64 range", path=path)
    if not math.isfinite(value):
        raise DocumentError("non-finite number", path=path)
    return value


def decode_matrix(value: Any, dim: int, path: str) -> torch.Tensor:
    if not isinstance(value, list) or len(value) != dim:
        raise DocumentError(f"expected {dim} rows", path=path)
    entries = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise DocumentError(f"expected {dim} entries", path=f"{path}[{i}]")
        for j, pair in enumerate(row):
            where = f"{path}[{i}][{j}]"
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise DocumentError("expected a [re, im] pair of numbers", path=where)
            entries.append(complex(_finite_float(pair[0], where), _finite_float(pair[1], where)))
    return torch.tensor(entries, dtype=DTYPE).reshape(dim, dim)


def _require(record: Dict[str, Any], key: str, kind, path: str = ""):
    if key not in record:
        raise DocumentError(f"missing field {key!r}", path=path or None)
    value = record[key]
    if kind is int and isinstance(value, float) and value == 0.0:
        value = 0
    if not isinstance(value, kind) or isinstance(value, bool):
        raise DocumentError(f"expected {kind.__name__}", path=f"{path}{key}")
    return value


def _check_schema(record: Any) -> None:
    if not isinstance(record, dict):
        raise DocumentError("a document must be a JSON object")
    version = _require(record, "schema_version", str)
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}", path="schema_version")


def _read_dim(record: Dict[str, Any]) -> int:
    dim = _require(record, "dim", int)
    if dim < 1:
        raise DocumentError(f"dimension must be positive, got {dim}", path="dim")
    return dim


@dataclass
class PovmDocument:
    """
    An ordered POVM on disk.

    Args:
        dim (`int`):
            Dimension of the Hilbert space.
        effects (`List[torch.Tensor]`):
            The coordinates in order.
        labels (`List[str]`):
            `"orig:k"` or `"term:i"` per coordinate.
        tolerances (`Dict[str, float]`, *optional*):
            Overrides of the configured tolerances for this document.
    """

    dim: int
    effects: List[torch.Tensor]
    labels: List[str]
    tolerances: Dict[str, float] = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, record: Any) -> "PovmDocument":
        _check_schema(record)
        dim = _read_dim(record)
        raw_effects = _require(record, "effects", list)
        if not raw_effects:
            raise DocumentError("at least one effect is required", path="effects")
        effects = [decode_matrix(e, dim, f"effects[{k}]") for k, e in enumerate(raw_effects)]

        labels = record.get("labels")
        if labels is None:
            labels = [str(Label.original(k + 1)) for k in range(len(effects))]
        if not isinstance(labels, list) or len(labels) != len(effects):
            raise DocumentError(f"expected {len(effects)} labels", path="labels")
        for k, label in enumerate(labels):
            if not isinstance(label, str):
                raise DocumentError("expected a string", path=f"labels[{k}]")
            try:
                Label.parse(label)
            except ValueError as e:
                raise DocumentError(str(e), path=f"labels[{k}]")

        tolerances = record.get("tolerances") or {}
        if not isinstance(tolerances, dict):
            raise DocumentError("expected an object", path="tolerances")
        checked = {}
        for name, value in tolerances.items():
            where = f"tolerances.{name}"
            if name not in Tolerances._fields:
                raise DocumentError(f"unknown tolerance, expected one of {Tolerances._fields}", path=where)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
                raise DocumentError("expected a positive number", path=where)
            checked[name] = _finite_float(value, where)
        return cls(dim=dim, effects=effects, labels=labels, tolerances=checked)

    @classmethod
    def read(cls, path: Union[str, os.PathLike]) -> "PovmDocument":
        return cls.from_dict(load(path))

    @classmethod
    def from_povm(cls, povm: OrderedPovm, tolerances: Optional[Dict[str, float]] = None) -> "PovmDocument":
        return cls(
            dim=povm.dim,
            effects=list(povm.effects),
            labels=[str(label) for label in povm.labels],
            tolerances=dict(tolerances or {}),
        )

    def to_dict(self) -> Dict[str, Any]:
        record = {
            "schema_version": self.schema_version,
            "dim": self.dim,
            "labels": list(self.labels),
            "effects": [encode_matrix(e) for e in self.effects],
        }
        if self.tolerances:
            record["tolerances"] = dict(self.tolerances)
        return record

    def write(self, path: Optional[Union[str, os.PathLike]] = None) -> str:
        return dump(self.to_dict(), path)

    def to_povm(self, check_tol: float, hermitian_tol: float = HERMITIAN_TOL) -> OrderedPovm:
        try:
            return OrderedPovm(self.effects, self.labels, check_tol=check_tol, hermitian_tol=hermitian_tol)
        except (ResiduaError, ValueError) as e:
            raise DocumentError(f"not a valid ordered POVM: {e}", path="effects")


@dataclass
class MatrixDocument:
    """A single `dim x dim` complex matrix on disk."""

    dim: int
    matrix: torch.Tensor
    schema_version: str = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, record: Any) -> "MatrixDocument":
        _check_schema(record)
        dim = _read_dim(record)
        matrix = decode_matrix(_require(record, "matrix", list), dim, "matrix")
        return cls(dim=dim, matrix=matrix)

    @classmethod
    def read(cls, path: Union[str, os.PathLike]) -> "MatrixDocument":
        return cls.from_dict(load(path))

    def to_dict(self) -> Dict[str, Any]:
        return {"schema_version": self.schema_version, "dim": self.dim, "matrix": encode_matrix(self.matrix)}

    def write(self, path: Optional[Union[str, os.PathLike]] = None) -> str:
        return dump(self.to_dict(), path)
