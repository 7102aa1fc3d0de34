"""Single-parameter bistochastic randomization matrices.

A matrix of this class is the convex combination ``lam * I + (1 - lam) * U``
where ``U`` is the uniform ``n x n`` matrix with every entry ``1/n``.  It is
never stored densely: every operation works from ``(lam, n)`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Smallest lambda accepted by default.  The inverse divides by lambda, so
#: sampling noise in observed frequencies is amplified by ``1/lam``.
MIN_LAMBDA = 1e-6

#: Largest number of entries ``dense()`` will materialize by default.
DENSE_CAP = 10**8

#: Tolerance for validating matrices that come from outside (files, users).
INPUT_TOL = 1e-9


def _check_lambda(lam: float, min_lambda: float = MIN_LAMBDA) -> float:
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise ValueError(f"lambda must be > 0 (the inverse is undefined at 0), got {lam!r}")
    if lam > 1.0:
        raise ValueError(f"lambda must be <= 1, got {lam!r}")
    if lam < min_lambda:
        raise ValueError(
            f"lambda={lam!r} is below the guard {min_lambda!r}; the inverse would amplify "
            "sampling noise by 1/lambda. Pass a smaller min_lambda to allow it."
        )
    return lam


def _xlog2x(p: float) -> float:
    return p * math.log2(p) if p > 0.0 else 0.0


@dataclass(frozen=True)
class LambdaMatrix:
    """The matrix ``lam * I + (1 - lam) * U`` of size ``size``.

    Parameters
    ----------
    lam : float
        Weight on the identity, in ``(0, 1]``.  ``lam = 1`` is no randomization.
    size : int
        Number of categories, at least 2.
    min_lambda : float
        Guard against near-singular matrices; lower it explicitly to go below
        :data:`MIN_LAMBDA`.
    """

    lam: float
    size: int
    min_lambda: float = MIN_LAMBDA

    def __post_init__(self):
        object.__setattr__(self, "lam", _check_lambda(self.lam, self.min_lambda))
        if int(self.size) != self.size or self.size < 2:
            raise ValueError(f"size must be an integer >= 2, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))

    @property
    def diagonal(self) -> float:
        """Probability that a value is reported unchanged."""
        return self.lam + (1.0 - self.lam) / self.size

    @property
    def off_diagonal(self) -> float:
        return (1.0 - self.lam) / self.size

    def entry(self, i: int, j: int) -> float:
        if not (0 <= i < self.size and 0 <= j < self.size):
            raise IndexError(f"entry ({i}, {j}) outside a {self.size}x{self.size} matrix")
        return self.diagonal if i == j else self.off_diagonal

    def _check_axis(self, v: np.ndarray, axis: int) -> None:
        if v.ndim == 0 or v.shape[axis] != self.size:
            raise ValueError(
                f"dimension mismatch: matrix has size {self.size}, "
                f"vector axis {axis} has length {v.shape[axis] if v.ndim else 0}"
            )

    def apply(self, v, axis: int = -1) -> np.ndarray:
        """Multiply by the matrix along ``axis`` in O(n) time.

        Equal to ``dense() @ v`` for a vector.  The matrix is symmetric, so
        this is also the action of its transpose.
        """
        v = np.asarray(v, dtype=float)
        self._check_axis(v, axis)
        if self.lam == 1.0:
            return v.copy()
        mean = v.mean(axis=axis, keepdims=True)
        return mean + self.lam * (v - mean)

    def apply_inverse(self, v, axis: int = -1) -> np.ndarray:
        """Multiply by the exact inverse ``(I - U)/lam + U`` along ``axis``.

        No matrix is inverted: the inverse keeps the mean and scales the
        deviation from the mean by ``1/lam``.
        """
        v = np.asarray(v, dtype=float)
        self._check_axis(v, axis)
        if self.lam == 1.0:
            return v.copy()
        mean = v.mean(axis=axis, keepdims=True)
        return mean + (v - mean) / self.lam

    def entropy_rate(self) -> float:
        """Shannon entropy of a row in bits; all rows are permutations of each other."""
        return -_xlog2x(self.diagonal) - (self.size - 1) * _xlog2x(self.off_diagonal)

    def strength(self) -> float:
        """Entropy rate as a fraction of the maximum, ``log2(size)``."""
        return self.entropy_rate() / math.log2(self.size)

    def dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        if self.size * self.size > cap:
            raise ValueError(f"dense {self.size}x{self.size} matrix exceeds the cap of {cap} entries")
        out = np.full((self.size, self.size), self.off_diagonal)
        np.fill_diagonal(out, self.diagonal)
        return out

    def dense_inverse(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Dense form of the closed-form inverse (for reporting and checks)."""
        if self.size * self.size > cap:
            raise ValueError(f"dense {self.size}x{self.size} matrix exceeds the cap of {cap} entries")
        out = np.full((self.size, self.size), (1.0 - 1.0 / self.lam) / self.size)
        out[np.diag_indices(self.size)] += 1.0 / self.lam
        return out


def strength_of(lam: float, n: int) -> float:
    return LambdaMatrix(lam, n, min_lambda=0.0).strength()


def solve_lambda(beta: float, n: int, min_lambda: float = MIN_LAMBDA, tol: float = 1e-9) -> float:
    """Find the lambda whose strength is ``beta`` for an ``n``-category attribute.

    Strength decreases strictly from 1 (lambda -> 0) to 0 (lambda = 1), so
    bisection on lambda converges to the unique solution.
    """
    beta = float(beta)
    if not 0.0 <= beta < 1.0:
        if beta >= 1.0:
            raise ValueError(
                "strength 1 means the uniform matrix (lambda = 0), which has no inverse; "
                "choose a target below 1"
            )
        raise ValueError(f"target strength must be in [0, 1), got {beta!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n!r}")
    if beta == 0.0:
        return 1.0
    lo, hi = min_lambda, 1.0
    if strength_of(lo, n) < beta:
        raise ValueError(
            f"target strength {beta!r} needs lambda below the guard {min_lambda!r}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if strength_of(mid, n) > beta:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    lam = lo if abs(strength_of(lo, n) - beta) <= abs(strength_of(hi, n) - beta) else hi
    if abs(strength_of(lam, n) - beta) > tol:
        raise ArithmeticError(f"bisection did not reach tolerance {tol} for beta={beta!r}")
    return lam


@dataclass(frozen=True)
class DenseBistochastic:
    """A dense bistochastic matrix given entry by entry (e.g. read from CSV)."""

    entries: np.ndarray
    tol: float = INPUT_TOL

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise ValueError("matrix has non-finite entries")
        if (a < -self.tol).any():
            i, j = np.argwhere(a < -self.tol)[0]
            raise ValueError(f"entry ({i}, {j}) = {a[i, j]!r} is negative")
        for name, sums in (("row", a.sum(axis=1)), ("column", a.sum(axis=0))):
            bad = np.flatnonzero(np.abs(sums - 1.0) > self.tol)
            if bad.size:
                raise ValueError(f"{name} {bad[0]} sums to {sums[bad[0]]!r}, not 1")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def is_positive(self) -> bool:
        return bool((self.entries > 0).all())

    @classmethod
    def from_csv(cls, path, tol: float = INPUT_TOL) -> "DenseBistochastic":
        return cls(np.loadtxt(path, delimiter=",", ndmin=2), tol=tol)


def extract_identity_weight(matrix) -> tuple[float, np.ndarray | None]:
    """Split a bistochastic matrix as ``lam * I + (1 - lam) * R``.

    ``lam`` is the smallest diagonal entry and ``R = (P - lam*I)/(1 - lam)``
    is again bistochastic, with a zero wherever the diagonal attains ``lam``.
    The identity gets ``(1.0, None)``: there is nothing left to spread.
    """
    if not isinstance(matrix, DenseBistochastic):
        matrix = DenseBistochastic(matrix)
    p = matrix.entries
    lam = float(p.diagonal().min())
    if lam <= 0.0:
        raise ValueError("a zero on the diagonal leaves no identity weight to extract")
    if lam >= 1.0:
        return 1.0, None
    residual = p / (1.0 - lam)
    residual[np.diag_indices_from(residual)] = (p.diagonal() - lam) / (1.0 - lam)
    return lam, residual
