"""The regularized objective and its thresholding primitives.

The central quantity is

    F(x) = sum_i |(A x - b)_i|^l  +  lam * sum_k |x_k|^p,

with exponents 1 <= l, p <= 2: l = p = 2 is damped least squares, p = 1 gives
sparse recovery, and l near 1 makes the data fit robust to outliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linop import as_operator

__all__ = [
    "Penalty",
    "lp_power_norm",
    "eval_flp",
    "soft_threshold",
    "hard_threshold",
    "optimality_prune",
]


@dataclass(frozen=True)
class Penalty:
    """Exponents and weight of the objective.

    ``lam`` is the regularization weight (>= 0), ``l`` the residual exponent
    and ``p`` the model exponent.  Exponents live in [1, 2]; values in (0, 1)
    are accepted only with ``allow_nonconvex=True`` since the objective stops
    being convex there.
    """

    lam: float
    l: float = 2.0
    p: float = 1.0
    allow_nonconvex: bool = False

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0.0:
            raise ValueError(f"lam must be finite and >= 0, got {self.lam}")
        for name, val in (("l", self.l), ("p", self.p)):
            if not np.isfinite(val) or val > 2.0 or val <= 0.0:
                raise ValueError(f"{name}={val} outside (0, 2]")
            if val < 1.0 and not self.allow_nonconvex:
                raise ValueError(
                    f"{name}={val} < 1 makes the objective non-convex; "
                    "pass allow_nonconvex=True to opt in")


def lp_power_norm(v: np.ndarray, q: float) -> float:
    """sum_k |v_k|^q, the q-th power of the lq quasi-norm."""
    v = np.asarray(v, dtype=np.float64)
    if q == 2.0:
        return float(v @ v)
    if q == 1.0:
        return float(np.sum(np.abs(v)))
    return float(np.sum(np.abs(v) ** q))


def eval_flp(A, b: np.ndarray, x: np.ndarray, pen: Penalty) -> float:
    """Evaluate F(x) = ||Ax - b||_l^l + lam ||x||_p^p exactly."""
    A = as_operator(A)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    return lp_power_norm(r, pen.l) + pen.lam * lp_power_norm(x, pen.p)


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Componentwise shrink toward zero: sign(x) * max(|x| - tau, 0)."""
    if tau < 0.0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def hard_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """Keep entries with |x_k| > tau, zero the rest (ties go to zero)."""
    if tau < 0.0:
        raise ValueError(f"threshold must be >= 0, got {tau}")
    x = np.asarray(x, dtype=np.float64)
    return np.where(np.abs(x) > tau, x, 0.0)


def optimality_prune(x: np.ndarray, A, b: np.ndarray, lam: float) -> np.ndarray:
    """Zero the entries the l1 stationarity test says cannot be active.

    With v = A^T (b - A x), a coordinate can sit at a minimizer of
    ||Ax-b||_2^2 + lam ||x||_1 with x_k != 0 only if |v_k| > lam / 2; entries
    failing that are set to zero, the rest are kept as-is.
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    v = A.apply_transpose(np.asarray(b, dtype=np.float64) - A.apply(x))
    return np.where(np.abs(v) > 0.5 * lam, x, 0.0)
