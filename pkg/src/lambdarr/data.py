"""Schemas, datasets and their file formats.

A schema is a JSON document pinning attribute order and, for categorical
attributes, category order::

    {"attributes": [
        {"name": "sex", "categories": ["F", "M"]},
        {"name": "income", "type": "numeric"}
    ]}

Datasets are UTF-8 CSV files whose header row names the attributes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .kron import JointScheme


class DataError(ValueError):
    """Input that does not conform to its schema."""


@dataclass(frozen=True)
class Attribute:
    name: str
    categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.categories is not None:
            cats = tuple(str(c) for c in self.categories)
            if len(cats) < 2:
                raise DataError(f"attribute {self.name!r} needs at least 2 categories")
            if len(set(cats)) != len(cats):
                raise DataError(f"attribute {self.name!r} has duplicate categories")
            object.__setattr__(self, "categories", cats)

    @property
    def numeric(self) -> bool:
        return self.categories is None

    @property
    def size(self) -> int:
        if self.categories is None:
            raise DataError(f"attribute {self.name!r} is numeric and has no category count")
        return len(self.categories)


@dataclass(frozen=True)
class Schema:
    attributes: tuple[Attribute, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        attrs = tuple(self.attributes)
        if not attrs:
            raise DataError("schema has no attributes")
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise DataError("schema attribute names must be distinct")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "_index", {})
        for a in attrs:
            if a.categories is not None:
                self._index[a.name] = {c: i for i, c in enumerate(a.categories)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Schema":
        try:
            attrs = []
            for item in doc["attributes"]:
                if item.get("type", "categorical") == "numeric":
                    attrs.append(Attribute(item["name"]))
                else:
                    attrs.append(Attribute(item["name"], tuple(item["categories"])))
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed schema: {exc!r}") from exc
        return cls(tuple(attrs))

    @classmethod
    def from_json(cls, path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = []
        for a in self.attributes:
            if a.numeric:
                out.append({"name": a.name, "type": "numeric"})
            else:
                out.append({"name": a.name, "categories": list(a.categories)})
        return {"attributes": out}

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def categorical(self) -> list[Attribute]:
        return [a for a in self.attributes if not a.numeric]

    @property
    def numeric(self) -> list[Attribute]:
        return [a for a in self.attributes if a.numeric]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.categorical)

    def scheme(self, lambdas: Mapping[str, float] | Sequence[float], **kwargs) -> JointScheme:
        """Joint scheme over the categorical attributes.

        ``lambdas`` is either a mapping by attribute name or a sequence with
        one value per schema attribute (numeric ones included).
        """
        lam = self.lambda_map(lambdas)
        cats = self.categorical
        return JointScheme.from_lambdas([lam[a.name] for a in cats], [a.size for a in cats], **kwargs)

    def lambda_map(self, lambdas: Mapping[str, float] | Sequence[float]) -> dict[str, float]:
        if isinstance(lambdas, Mapping):
            missing = [n for n in self.names if n not in lambdas]
            extra = [n for n in lambdas if n not in self.names]
            if missing or extra:
                raise DataError(f"lambdas do not match schema (missing {missing}, unknown {extra})")
            return {n: float(lambdas[n]) for n in self.names}
        lambdas = list(lambdas)
        if len(lambdas) != len(self.attributes):
            raise DataError(f"{len(lambdas)} lambdas given for {len(self.attributes)} attributes")
        return {n: float(v) for n, v in zip(self.names, lambdas)}

    def encode(self, name: str, label: str) -> int:
        return self._index[name][label]


@dataclass
class Dataset:
    """Records split into categorical codes and numeric values.

    ``codes`` has one column per categorical attribute and ``values`` one
    column per numeric attribute, each in schema order.
    """

    schema: Schema
    codes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=float)
        self.codes = self.codes.reshape(len(self.codes), len(self.schema.categorical))
        self.values = self.values.reshape(len(self.values), len(self.schema.numeric))
        if self.codes.shape[0] != self.values.shape[0]:
            raise DataError("categorical and numeric columns have different lengths")
        if self.codes.size:
            bad = (self.codes < 0) | (self.codes >= np.array(self.schema.shape))
            if bad.any():
                row, col = np.argwhere(bad)[0]
                name = self.schema.categorical[col].name
                raise DataError(f"record {row}: code {self.codes[row, col]} out of range for {name!r}")

    def __len__(self):
        return self.codes.shape[0]


def read_csv(path, schema: Schema) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected a header row") from None
        if sorted(header) != sorted(schema.names):
            raise DataError(f"{path}: header {header} does not match schema attributes {schema.names}")
        pos = {name: header.index(name) for name in schema.names}
        cats, nums = schema.categorical, schema.numeric
        codes, values = [], []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            try:
                codes.append([schema.encode(a.name, row[pos[a.name]]) for a in cats])
            except KeyError:
                bad = next(a for a in cats if row[pos[a.name]] not in a.categories)
                raise DataError(
                    f"{path}:{line}: column {bad.name!r} has unknown category {row[pos[bad.name]]!r}"
                ) from None
            try:
                values.append([float(row[pos[a.name]]) for a in nums])
            except ValueError:
                bad = next(a for a in nums if not _is_float(row[pos[a.name]]))
                raise DataError(
                    f"{path}:{line}: column {bad.name!r} is not numeric: {row[pos[bad.name]]!r}"
                ) from None
    return Dataset(schema, np.array(codes, dtype=np.int64), np.array(values, dtype=float))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def write_csv(path, data: Dataset) -> None:
    schema = data.schema
    cat_col = {a.name: i for i, a in enumerate(schema.categorical)}
    num_col = {a.name: i for i, a in enumerate(schema.numeric)}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.names)
        for r in range(len(data)):
            row = []
            for a in schema.attributes:
                if a.numeric:
                    row.append(repr(float(data.values[r, num_col[a.name]])))
                else:
                    row.append(a.categories[data.codes[r, cat_col[a.name]]])
            writer.writerow(row)
