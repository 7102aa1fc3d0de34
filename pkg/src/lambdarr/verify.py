"""Cross-checks of every closed form against the dense oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import oracle
from .kron import JointScheme, inverse_terms
from .matrix import LambdaMatrix, extract_identity_weight


@dataclass
class Check:
    name: str
    error: float
    detail: str = ""
    tol: float = 1e-10

    @property
    def ok(self) -> bool:
        return bool(self.error <= self.tol)

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        msg = f"{status}  {self.name}: max error {self.error:.3e} (tol {self.tol:.0e})"
        return msg + (f"; {self.detail}" if self.detail and not self.ok else "")


def _worst(pairs):
    """Largest abs difference over (closed_form, oracle, label) triples, with the label."""
    worst, where = 0.0, ""
    for got, want, label in pairs:
        err = float(np.max(np.abs(np.asarray(got) - np.asarray(want))))
        if err > worst or not np.isfinite(err):
            worst, where = err, f"{label}: closed form {np.ravel(got)[:4]} vs oracle {np.ravel(want)[:4]}"
    return worst, where


def run_checks(seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = []

    singles = [(float(lam), int(n)) for lam, n in zip(rng.uniform(0.05, 1.0, 30), rng.integers(2, 21, 30))]
    singles += [(1.0, 3), (0.8, 2), (0.4, 2)]

    pairs = []
    for lam, n in singles:
        v = rng.normal(size=n)
        pairs.append((LambdaMatrix(lam, n).apply(v), oracle.dense_lambda(lam, n) @ v, f"lambda={lam:.4g} n={n}"))
    checks.append(Check("apply == dense multiply", *_worst(pairs), tol=1e-10))

    pairs = []
    for lam, n in singles:
        v = rng.normal(size=n)
        want = oracle.dense_invert(oracle.dense_lambda(lam, n)) @ v
        pairs.append((LambdaMatrix(lam, n).apply_inverse(v), want, f"lambda={lam:.4g} n={n}"))
    checks.append(Check("apply_inverse == LU inverse", *_worst(pairs), tol=1e-10))

    pairs = [
        (LambdaMatrix(lam, n).entropy_rate(), oracle.dense_entropy_rate(oracle.dense_lambda(lam, n)), f"lambda={lam:.4g} n={n}")
        for lam, n in singles
    ]
    checks.append(Check("entropy_rate == dense row entropy", *_worst(pairs), tol=1e-10))

    schemes = []
    for m in (1, 2, 3):
        for sizes in itertools.product(range(2, 5), repeat=m):
            schemes.append(JointScheme.from_lambdas(rng.uniform(0.05, 1.0, m), sizes))
    schemes.append(JointScheme.from_lambdas([0.6, 0.7, 0.4], [5, 5, 5]))

    worst_bi, where_bi = 0.0, ""
    ent, fwd, inv, terms, ones = [], [], [], [], []
    for s in schemes:
        dense = oracle.dense_scheme(s)
        label = f"lambdas={np.round(s.lambdas, 4).tolist()} shape={s.shape}"
        err = max(np.abs(dense.sum(axis=0) - 1).max(), np.abs(dense.sum(axis=1) - 1).max())
        if err > worst_bi:
            worst_bi, where_bi = err, label
        ent.append((s.entropy_rate(), oracle.dense_entropy_rate(dense), label))
        t = rng.dirichlet(np.ones(s.cells)).reshape(s.shape)
        fwd.append((s.apply(t).ravel(), dense @ t.ravel(), label))
        lu = oracle.dense_invert(dense)
        inv.append((s.apply_inverse(t).ravel(), lu @ t.ravel(), label))
        terms.append((oracle.dense_from_terms(s, inverse_terms(s)), lu, label))
        ones.append((oracle.dense_from_terms(s, inverse_terms(s, basis="ones"), basis="ones"), lu, label))
    checks.append(Check("Kronecker product is bistochastic", worst_bi, tol=1e-12, detail=where_bi))
    checks.append(Check("joint entropy == sum of entropies", *_worst(ent), tol=1e-10))
    checks.append(Check("joint apply == dense Kronecker multiply", *_worst(fwd), tol=1e-10))
    checks.append(Check("joint apply_inverse == LU inverse", *_worst(inv), tol=1e-10))
    checks.append(Check("(I-P*)/P* expansion == LU inverse", *_worst(terms), tol=1e-9))
    checks.append(Check("I/ones expansion == LU inverse", *_worst(ones), tol=1e-9))

    pair = JointScheme.from_lambdas([0.8, 0.4], [2, 2])
    checks.append(Check(
        "two-binary example first row",
        *_worst([(oracle.dense_scheme(pair)[0], [0.63, 0.27, 0.07, 0.03], "row 0")]),
        tol=1e-12,
    ))

    pairs = []
    for _ in range(20):
        n = int(rng.integers(2, 13))
        weights = rng.dirichlet(np.ones(4))
        d = weights[0] * np.ones((n, n)) / n
        for w in weights[1:]:
            d += w * np.eye(n)[rng.permutation(n)]
        lam, residual = extract_identity_weight(d)
        if residual is None:
            pairs.append((np.eye(n), d, f"n={n}"))
            continue
        pairs.append((lam * np.eye(n) + (1 - lam) * residual, d, f"n={n}"))
    checks.append(Check("identity-weight extraction reconstructs input", *_worst(pairs), tol=1e-12))

    a = oracle.dense_scheme(JointScheme.from_lambdas([0.3, 0.9], [3, 4]))
    checks.append(Check(
        "oracle inverse is an involution",
        *_worst([(oracle.dense_invert(oracle.dense_invert(a)), a, "12x12")]),
        tol=1e-8,
    ))
    return checks
