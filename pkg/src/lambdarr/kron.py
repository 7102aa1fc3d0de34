"""Joint randomization of several attributes as an implicit Kronecker product.

The joint matrix ``P_1 kron ... kron P_m`` is never formed.  A joint
frequency table is an ``m``-way array of shape ``(n_1, ..., n_m)`` in C
order, so attribute 1 is the slowest-varying index and ``T.ravel()`` lines
up with the rows of the dense Kronecker product.  Multiplying by the joint
matrix (or its inverse) is one per-attribute pass along each axis, which
costs O(N * m) for N cells.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matrix import LambdaMatrix

#: Largest joint table (number of cells) allocated by default.
CELL_CAP = 10**7

#: Largest number of attributes for which the 2^m inverse expansion is listed.
TERM_CAP = 20


@dataclass(frozen=True)
class InverseTerm:
    """One term ``coefficient * kron_i T_i(epsilon_i)`` of the inverse expansion."""

    epsilon: tuple[int, ...]
    coefficient: float

    @property
    def weight(self) -> int:
        return sum(self.epsilon)


@dataclass(frozen=True)
class JointScheme:
    factors: tuple[LambdaMatrix, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a scheme needs at least one attribute")
        if not all(isinstance(f, LambdaMatrix) for f in factors):
            raise TypeError("scheme factors must be LambdaMatrix instances")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_lambdas(cls, lambdas: Sequence[float], sizes: Sequence[int], **kwargs) -> "JointScheme":
        if len(lambdas) != len(sizes):
            raise ValueError(f"{len(lambdas)} lambdas given for {len(sizes)} attributes")
        return cls(tuple(LambdaMatrix(lam, n, **kwargs) for lam, n in zip(lambdas, sizes)))

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(f.lam for f in self.factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    @property
    def cells(self) -> int:
        return math.prod(self.shape)

    def __len__(self):
        return len(self.factors)

    def entropy_rate(self) -> float:
        """Entropy rate of the joint matrix: the sum over attributes."""
        return sum(f.entropy_rate() for f in self.factors)

    def max_entropy(self) -> float:
        return sum(math.log2(n) for n in self.shape)

    def strength(self) -> float:
        return self.entropy_rate() / self.max_entropy()

    def diagonal_truthfulness(self) -> float:
        """Probability that a whole record is reported unchanged."""
        return math.prod(f.diagonal for f in self.factors)

    def check_cells(self, cap: int = CELL_CAP) -> None:
        if self.cells > cap:
            raise ValueError(
                f"joint table would have {self.cells} cells, above the cap of {cap}; "
                "estimate marginals instead or raise the cap"
            )

    def _check_tensor(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.shape != self.shape:
            raise ValueError(f"tensor shape {t.shape} does not match scheme shape {self.shape}")
        return t

    def apply(self, t) -> np.ndarray:
        """Multiply a joint table by the joint randomization matrix."""
        t = self._check_tensor(t)
        for axis, f in enumerate(self.factors):
            t = f.apply(t, axis=axis)
        return t

    def apply_inverse(self, t) -> np.ndarray:
        """Multiply a joint table by the exact inverse of the joint matrix."""
        t = self._check_tensor(t)
        for axis, f in enumerate(self.factors):
            t = f.apply_inverse(t, axis=axis)
        return t

    def apply_inverse_expanded(self, t) -> np.ndarray:
        """Same as :meth:`apply_inverse`, by summing all 2^m expansion terms.

        O(N * m * 2^m); kept as a second route for checking.
        """
        t = self._check_tensor(t)
        out = np.zeros_like(t)
        for term in inverse_terms(self):
            part = t
            for axis, eps in enumerate(term.epsilon):
                mean = part.mean(axis=axis, keepdims=True)
                part = part - mean if eps else np.broadcast_to(mean, part.shape)
            out += term.coefficient * part
        return out


def inverse_terms(scheme: JointScheme, basis: str = "complement") -> list[InverseTerm]:
    """List the 2^m terms of the closed-form inverse, grouped by weight.

    With ``basis="complement"`` a 1 in ``epsilon`` selects ``I - U`` and a 0
    selects ``U``; the coefficient is the product of ``1/lam_i`` over the
    selected ``I - U`` factors.  With ``basis="ones"`` a 1 selects the
    all-ones matrix and a 0 the identity, with coefficient
    ``prod (1/lam_i)^(1-e_i) * (-(1-lam_i)/(lam_i n_i))^e_i``.

    Terms come with zero ones first, then one, and so on; within a group
    the positions of the ones are in lexicographic order.
    """
    m = len(scheme)
    if m > TERM_CAP:
        raise ValueError(f"{m} attributes give 2^{m} terms, above the cap of 2^{TERM_CAP}")
    if basis not in ("complement", "ones"):
        raise ValueError(f"unknown basis {basis!r}")
    terms = []
    for k in range(m + 1):
        for ones in itertools.combinations(range(m), k):
            eps = tuple(1 if i in ones else 0 for i in range(m))
            coef = 1.0
            for e, f in zip(eps, scheme.factors):
                if basis == "complement":
                    if e:
                        coef /= f.lam
                elif e:
                    coef *= -(1.0 - f.lam) / (f.lam * f.size)
                else:
                    coef /= f.lam
            terms.append(InverseTerm(eps, coef))
    return terms


def format_term(scheme: JointScheme, term: InverseTerm) -> str:
    """Render a complement-basis term, e.g. ``1/(0.6*0.7) (I-P*) x (I-P*) x P*``."""
    lams = [f"{f.lam:g}" for e, f in zip(term.epsilon, scheme.factors) if e and f.lam != 1.0]
    if not lams:
        coef = ""
    elif len(lams) == 1:
        coef = f"1/{lams[0]} "
    else:
        coef = f"1/({'*'.join(lams)}) "
    mats = " x ".join("(I-P*)" if e else "P*" for e in term.epsilon)
    return coef + mats


# ---------------------------------------------------------------------------
# Serialization: CSV is one row per cell (index tuple, value); JSON carries
# the shape next to a flat C-order value list.


def write_tensor_csv(path, t, names: Sequence[str] | None = None) -> None:
    """Write one row per cell: the index tuple, then the value(s).

    ``t`` is a single array (column ``value``) or a mapping of column name
    to equally shaped arrays.
    """
    columns = {k: np.asarray(v, dtype=float) for k, v in t.items()} if isinstance(t, dict) else {"value": np.asarray(t, dtype=float)}
    shape = next(iter(columns.values())).shape
    if any(c.shape != shape for c in columns.values()):
        raise ValueError("all value columns must have the same shape")
    names = list(names) if names else [f"dim{i}" for i in range(len(shape))]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names + list(columns))
        for idx in np.ndindex(*shape):
            writer.writerow(list(idx) + [repr(float(c[idx])) for c in columns.values()])


def read_tensor_csv(path, column: str = "value") -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        rows = list(reader)
    if column not in fields:
        raise ValueError(f"{path}: no column {column!r}")
    if not rows:
        raise ValueError(f"{path}: no cells")
    # index columns hold integers; values are always written with a decimal point
    dims = [f for f in fields if not _is_value_column(f, rows[0])]
    idx = np.array([[int(r[d]) for d in dims] for r in rows], dtype=np.int64)
    values = np.array([float(r[column]) for r in rows])
    shape = tuple(int(s) for s in idx.max(axis=0) + 1)
    out = np.full(shape, np.nan)
    out[tuple(idx.T)] = values
    if np.isnan(out).any():
        raise ValueError(f"{path}: missing cells for shape {shape}")
    return out


def _is_value_column(name: str, row: dict) -> bool:
    try:
        int(row[name])
    except ValueError:
        return True
    return False


def tensor_to_json(t: np.ndarray, names: Sequence[str] | None = None) -> dict:
    t = np.asarray(t, dtype=float)
    doc = {"shape": list(t.shape), "values": [float(v) for v in t.ravel()]}
    if names:
        doc["names"] = list(names)
    return doc


def tensor_from_json(doc: dict) -> np.ndarray:
    shape = tuple(doc["shape"])
    values = np.asarray(doc["values"], dtype=float)
    if values.size != math.prod(shape):
        raise ValueError(f"{values.size} values do not fill shape {shape}")
    return values.reshape(shape)


def write_tensor_json(path, t: np.ndarray, names: Sequence[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tensor_to_json(t, names), fh)


def read_tensor_json(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return tensor_from_json(json.load(fh))
