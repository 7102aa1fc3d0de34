"""Brute-force dense reference algebra.

Everything here works on explicit matrices and deliberately avoids the
closed forms in :mod:`lambdarr.matrix` and :mod:`lambdarr.kron`, so that
agreement between the two is evidence rather than a tautology.  Sizes are
capped to keep checks interactive.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

#: Default largest side length of a dense oracle matrix.
ORACLE_CAP = 512

PIVOT_TOL = 1e-12


class SingularMatrixError(ValueError):
    pass


class CheckResult(NamedTuple):
    ok: bool
    message: str

    def __bool__(self):
        return self.ok


def _square(a, name="matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def dense_lambda(lam: float, n: int) -> np.ndarray:
    """``lam * I + (1 - lam) * ones/n`` written out literally."""
    return lam * np.eye(n) + (1.0 - lam) * np.ones((n, n)) / n


def dense_kron(a, b, cap: int = ORACLE_CAP) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > cap:
        raise ValueError(f"Kronecker product would be {rows}x{cols}, above the oracle cap {cap}")
    out = np.empty((rows, cols))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            out[i * b.shape[0]:(i + 1) * b.shape[0], j * b.shape[1]:(j + 1) * b.shape[1]] = a[i, j] * b
    return out


def dense_kron_all(mats: Sequence, cap: int = ORACLE_CAP) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = dense_kron(out, m, cap=cap)
    return out


def dense_scheme(scheme, cap: int = ORACLE_CAP) -> np.ndarray:
    """The full joint randomization matrix of a :class:`~lambdarr.kron.JointScheme`."""
    return dense_kron_all([dense_lambda(f.lam, f.size) for f in scheme.factors], cap=cap)


def dense_invert(a, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Gauss-Jordan elimination with partial pivoting."""
    a = _square(a)
    n = a.shape[0]
    work = np.hstack([a, np.eye(n)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(work[col:, col])))
        pivot = work[pivot_row, col]
        if abs(pivot) < pivot_tol:
            raise SingularMatrixError(
                f"matrix is singular to tolerance: pivot {abs(pivot):.3e} in column {col} "
                f"is below {pivot_tol:.0e}"
            )
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
        work[col] /= pivot
        factors = work[:, col].copy()
        factors[col] = 0.0
        work -= np.outer(factors, work[col])
    return work[:, n:]


def dense_lu(a, pivot_tol: float = PIVOT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Doolittle LU with partial pivoting: ``a[perm] = L @ U``, packed in one array."""
    lu = _square(a).copy()
    n = lu.shape[0]
    perm = np.arange(n)
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(lu[col:, col])))
        if abs(lu[pivot_row, col]) < pivot_tol:
            raise SingularMatrixError(
                f"matrix is singular to tolerance: pivot {abs(lu[pivot_row, col]):.3e} in column {col} "
                f"is below {pivot_tol:.0e}"
            )
        if pivot_row != col:
            lu[[col, pivot_row]] = lu[[pivot_row, col]]
            perm[[col, pivot_row]] = perm[[pivot_row, col]]
        lu[col + 1:, col] /= lu[col, col]
        lu[col + 1:, col + 1:] -= np.outer(lu[col + 1:, col], lu[col, col + 1:])
    return lu, perm


def dense_solve(a, b, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Solve ``a @ x = b`` by LU substitution; ``b`` may hold several columns."""
    lu, perm = dense_lu(a, pivot_tol)
    x = np.array(b, dtype=float)[perm]
    n = lu.shape[0]
    for i in range(n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in reversed(range(n)):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


def dense_entropy_rate(a, tol: float = 1e-9) -> float:
    """Average Shannon entropy (bits) of the rows of a row-stochastic matrix."""
    a = _square(a)
    if (a < -tol).any() or (np.abs(a.sum(axis=1) - 1.0) > tol).any():
        raise ValueError("matrix is not row-stochastic")
    logs = np.zeros_like(a)
    positive = a > 0
    logs[positive] = np.log2(a[positive])
    return float(np.mean(-(a * logs).sum(axis=1)))


def dense_bistochastic_check(a, tol: float = 1e-12) -> CheckResult:
    a = _square(a)
    neg = np.argwhere(a < -tol)
    if neg.size:
        i, j = neg[0]
        return CheckResult(False, f"entry ({i}, {j}) = {a[i, j]!r} is negative")
    for name, sums in (("row", a.sum(axis=1)), ("column", a.sum(axis=0))):
        for k, s in enumerate(sums):
            if abs(s - 1.0) > tol:
                return CheckResult(False, f"{name} {k} sums to {s!r}")
    return CheckResult(True, "bistochastic")


def dense_from_terms(scheme, terms, basis: str = "complement", cap: int = ORACLE_CAP) -> np.ndarray:
    """Sum ``coefficient * kron(chosen matrices)`` over an inverse expansion.

    ``basis="complement"`` uses ``I - U`` (epsilon 1) and ``U`` (epsilon 0);
    ``basis="ones"`` uses the all-ones matrix (epsilon 1) and ``I`` (epsilon 0).
    """
    n_total = 1
    for f in scheme.factors:
        n_total *= f.size
    if n_total > cap:
        raise ValueError(f"expansion would be {n_total}x{n_total}, above the oracle cap {cap}")
    out = np.zeros((n_total, n_total))
    for term in terms:
        mats = []
        for eps, f in zip(term.epsilon, scheme.factors):
            n = f.size
            if basis == "complement":
                mats.append(np.eye(n) - np.ones((n, n)) / n if eps else np.ones((n, n)) / n)
            elif basis == "ones":
                mats.append(np.ones((n, n)) if eps else np.eye(n))
            else:
                raise ValueError(f"unknown basis {basis!r}")
        out += term.coefficient * dense_kron_all(mats, cap=cap)
    return out
