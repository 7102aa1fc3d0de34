"""Sampling randomized records.

Each attribute of each record is randomized independently: keep the true
category with probability ``lam``, otherwise draw a category uniformly from
all ``n`` of them (the true one included).  That two-stage draw reproduces a
row of ``lam * I + (1 - lam) * U`` exactly, and independence across
attributes reproduces a row of the Kronecker product.

Randomness is counter-based.  The draws for record ``r`` and attribute ``a``
come from the Philox block at counter ``(r, a, 0, 0)`` under the key
``master_seed``, so output depends only on ``(master_seed, r, a)`` and never
on chunking, thread count, or whether records are randomized one at a time
(local) or all together (central).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Dataset, DataError
from .kron import JointScheme
from .matrix import _check_lambda

MODES = ("central", "local-simulated")

_U53 = 2.0**-53


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"master seed must be an unsigned 64-bit integer, got {seed}")
        object.__setattr__(self, "master_seed", seed)

    def blocks(self, attribute: int, start: int, count: int) -> np.ndarray:
        """Raw 64-bit words for records ``start .. start+count-1``, shape ``(count, 4)``."""
        bitgen = np.random.Philox(key=self.master_seed, counter=[start, attribute, 0, 0])
        return bitgen.random_raw(4 * count).reshape(count, 4)


def _to_unit(words: np.ndarray) -> np.ndarray:
    return (words >> np.uint64(11)).astype(np.float64) * _U53


def _randomize_chunk(scheme: JointScheme, codes: np.ndarray, seed: SeedSpec, start: int) -> np.ndarray:
    out = codes.copy()
    count = codes.shape[0]
    for a, f in enumerate(scheme.factors):
        if f.lam == 1.0:
            continue
        raw = seed.blocks(a, start, count)
        keep = _to_unit(raw[:, 0]) < f.lam
        draw = np.minimum((_to_unit(raw[:, 1]) * f.size).astype(np.int64), f.size - 1)
        out[:, a] = np.where(keep, codes[:, a], draw)
    return out


def randomize_codes(
    scheme: JointScheme,
    codes,
    seed: SeedSpec,
    start: int = 0,
    chunk_size: int = 1 << 16,
    workers: int = 1,
) -> np.ndarray:
    """Randomize an ``(n, m)`` array of category codes.

    Row ``k`` is treated as record number ``start + k``.
    """
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim != 2 or codes.shape[1] != len(scheme):
        raise ValueError(f"codes must have shape (n, {len(scheme)}), got {codes.shape}")
    if codes.size and ((codes < 0) | (codes >= np.array(scheme.shape))).any():
        raise ValueError("category code out of range for the scheme")
    n = codes.shape[0]
    bounds = [(lo, min(lo + chunk_size, n)) for lo in range(0, n, chunk_size)]
    if workers <= 1 or len(bounds) <= 1:
        parts = [_randomize_chunk(scheme, codes[lo:hi], seed, start + lo) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _randomize_chunk(scheme, codes[b[0]:b[1]], seed, start + b[0]), bounds))
    if not parts:
        return codes.copy()
    return np.concatenate(parts, axis=0)


def randomize_record(scheme: JointScheme, record: Sequence[int], seed: SeedSpec, record_index: int) -> tuple[int, ...]:
    """Randomize a single record as its owner would in the local setting."""
    row = np.asarray(record, dtype=np.int64).reshape(1, -1)
    return tuple(int(v) for v in randomize_codes(scheme, row, seed, start=record_index)[0])


def transform_numeric(lam: float, x) -> np.ndarray:
    """Apply ``lam * I + (1 - lam) * U`` with individuals as categories.

    Each value becomes a convex combination of itself and the column mean,
    so the mean is kept and deviations shrink by ``lam``.
    """
    lam = _check_lambda(lam, min_lambda=0.0)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("a numeric attribute needs at least 2 individuals")
    if lam == 1.0:
        return x.copy()
    mean = x.mean()
    return mean + lam * (x - mean)


def randomize_dataset(
    scheme: JointScheme,
    data: Dataset,
    seed: SeedSpec,
    numeric_lambdas: Sequence[float] = (),
    mode: str = "central",
    workers: int = 1,
) -> Dataset:
    """Randomize every record of ``data``; output order matches input order.

    ``scheme`` covers the categorical attributes in schema order and
    ``numeric_lambdas`` the numeric ones.  Numeric attributes can only be
    handled centrally: in the local setting nobody knows the other
    individuals' values, so they must be categorized beforehand.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    schema = data.schema
    if scheme.shape != schema.shape:
        raise DataError(f"scheme shape {scheme.shape} does not match schema shape {schema.shape}")
    if len(numeric_lambdas) != len(schema.numeric):
        raise DataError(f"{len(numeric_lambdas)} numeric lambdas for {len(schema.numeric)} numeric attributes")
    if mode == "local-simulated" and schema.numeric:
        names = [a.name for a in schema.numeric]
        raise DataError(
            f"numeric attributes {names} cannot be randomized locally; "
            "categorize them first or use central mode"
        )
    codes = randomize_codes(scheme, data.codes, seed, workers=workers)
    values = data.values.copy()
    if len(data):
        for j, lam in enumerate(numeric_lambdas):
            values[:, j] = transform_numeric(lam, values[:, j])
    return Dataset(schema, codes, values)
