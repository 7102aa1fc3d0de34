"""Estimating true distributions from randomized data.

If ``theta`` is the distribution of randomized records and ``P`` the joint
randomization matrix, the true distribution ``pi`` satisfies
``theta = P^T pi``.  The matrices here are symmetric, so the unbiased
estimate is ``P^{-1} theta_hat``, computed mode by mode without inverting
anything.  Estimates may have negative cells; they are returned as they are.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .kron import CELL_CAP, JointScheme
from .matrix import LambdaMatrix, _check_lambda


def empirical_joint(codes, shape: Sequence[int], cap: int = CELL_CAP) -> np.ndarray:
    """Joint relative frequencies of ``(n, m)`` category codes."""
    codes = np.asarray(codes, dtype=np.int64)
    shape = tuple(int(s) for s in shape)
    if codes.ndim != 2 or codes.shape[1] != len(shape):
        raise ValueError(f"codes must have shape (n, {len(shape)}), got {codes.shape}")
    if codes.shape[0] == 0:
        raise ValueError("cannot estimate frequencies from an empty dataset")
    cells = int(np.prod(shape))
    if cells > cap:
        raise ValueError(f"joint table would have {cells} cells, above the cap of {cap}")
    flat = np.ravel_multi_index(codes.T, shape)
    counts = np.bincount(flat, minlength=cells)
    return (counts / codes.shape[0]).reshape(shape)


def estimate_true_joint(scheme: JointScheme, theta_hat) -> np.ndarray:
    return scheme.apply_inverse(theta_hat)


def estimate_marginal(factor: LambdaMatrix, theta_hat_marginal) -> np.ndarray:
    return factor.apply_inverse(theta_hat_marginal)


def marginal(t, keep: Sequence[int]) -> np.ndarray:
    """Sum out every axis not in ``keep``."""
    t = np.asarray(t, dtype=float)
    drop = tuple(a for a in range(t.ndim) if a not in set(keep))
    return t.sum(axis=drop)


class Projection(NamedTuple):
    values: np.ndarray
    projected: bool


def project_to_simplex(pi_hat, tol: float = 1e-6) -> Projection:
    """Clip negative cells to zero and renormalize.

    This trades the unbiasedness of the estimate for a valid distribution,
    so it is never applied unless asked for.  ``projected`` tells whether
    anything changed.
    """
    pi_hat = np.asarray(pi_hat, dtype=float)
    total = pi_hat.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"estimate sums to {total!r}, expected 1")
    if (pi_hat >= 0).all():
        return Projection(pi_hat.copy(), False)
    clipped = np.clip(pi_hat, 0.0, None)
    mass = clipped.sum()
    if mass <= 0.0:
        raise ValueError("every cell is non-positive; there is nothing to renormalize")
    return Projection(clipped / mass, True)


def covariance(x, y) -> float:
    """Population covariance (divides by n)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.mean((x - x.mean()) * (y - y.mean())))


def predict_covariance(lambda_a: float, lambda_b: float, cov_xy: float) -> float:
    """Covariance of two attributes after randomizing each with its own lambda.

    The cross term through the uniform matrix vanishes on centered vectors,
    leaving ``lambda_a * lambda_b * cov``.  Exact for the numeric transform;
    for sampled categorical data it holds in expectation only.
    """
    la = _check_lambda(lambda_a, min_lambda=0.0)
    lb = _check_lambda(lambda_b, min_lambda=0.0)
    return la * lb * float(cov_xy)
