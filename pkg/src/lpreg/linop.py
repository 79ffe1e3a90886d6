"""Linear operator abstraction, conjugate gradients and spectral norm estimation.

Everything downstream (solvers, continuation, synthetic problems) talks to
matrices through the small :class:`LinearOperator` interface so that dense
arrays, compressed-sparse-row matrices and matrix-free compositions are
interchangeable.  All vectors are 1-D float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import CgBreakdownError

__all__ = [
    "LinearOperator",
    "DenseOperator",
    "SparseOperator",
    "CallableOperator",
    "as_operator",
    "SpdSystem",
    "CgResult",
    "cg_solve",
    "spectral_norm_estimate",
]


class LinearOperator:
    """A real linear map with an explicit transpose.

    Subclasses set ``rows``/``cols`` and implement ``_forward`` and
    ``_transpose``.  The public ``apply``/``apply_transpose`` wrappers enforce
    dimensions and float64 dtype; a shape mismatch raises ``ValueError``
    rather than silently truncating or broadcasting.
    """

    rows: int
    cols: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = _check_vec(x, self.cols, "apply")
        return self._forward(x)

    def apply_transpose(self, y: np.ndarray) -> np.ndarray:
        y = _check_vec(y, self.rows, "apply_transpose")
        return self._transpose(y)

    def _forward(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def _transpose(self, y: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)


def _check_vec(v: np.ndarray, n: int, where: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise ValueError(f"{where}: expected 1-D vector of length {n}, got shape {v.shape}")
    return v


class DenseOperator(LinearOperator):
    """Wrap a 2-D float64 array (row-major) as an operator."""

    def __init__(self, a: np.ndarray):
        a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
        if a.ndim != 2:
            raise ValueError(f"dense operator needs a 2-D array, got shape {a.shape}")
        self.a = a
        self.rows, self.cols = a.shape

    def _forward(self, x):
        return self.a @ x

    def _transpose(self, y):
        return self.a.T @ y


class SparseOperator(LinearOperator):
    """Wrap a scipy sparse matrix (stored as CSR) as an operator."""

    def __init__(self, a):
        self.a = sp.csr_matrix(a).astype(np.float64)
        self.rows, self.cols = self.a.shape

    def _forward(self, x):
        return self.a @ x

    def _transpose(self, y):
        return self.a.T @ y


class CallableOperator(LinearOperator):
    """Matrix-free operator from a forward/transpose callable pair."""

    def __init__(self, rows: int, cols: int,
                 forward: Callable[[np.ndarray], np.ndarray],
                 transpose: Callable[[np.ndarray], np.ndarray]):
        self.rows = int(rows)
        self.cols = int(cols)
        self._fwd = forward
        self._tra = transpose

    def _forward(self, x):
        return np.asarray(self._fwd(x), dtype=np.float64)

    def _transpose(self, y):
        return np.asarray(self._tra(y), dtype=np.float64)


def as_operator(a) -> LinearOperator:
    """Coerce an ndarray, sparse matrix or operator to :class:`LinearOperator`."""
    if isinstance(a, LinearOperator):
        return a
    if sp.issparse(a):
        return SparseOperator(a)
    return DenseOperator(np.asarray(a))


@dataclass
class SpdSystem:
    """A symmetric positive-definite system ``M x = rhs`` given by its action."""

    n: int
    apply: Callable[[np.ndarray], np.ndarray]
    rhs: np.ndarray


@dataclass
class CgResult:
    x: np.ndarray
    iters: int
    relres: float


def cg_solve(system: SpdSystem, x0: np.ndarray | None = None,
             max_iter: int = 100, tol: float = 1e-10,
             callback: Callable[[np.ndarray], None] | None = None) -> CgResult:
    """Plain conjugate gradients on an SPD system.

    Parameters
    ----------
    system : SpdSystem
        Action of M and the right-hand side.
    x0 : ndarray, optional
        Warm start; zeros when omitted.
    max_iter, tol : int, float
        Stop after ``max_iter`` steps or once the recurrence residual
        satisfies ``||r|| <= tol * ||rhs||``.
    callback : callable, optional
        Invoked with the current iterate after every accepted step.

    Returns
    -------
    CgResult
        Final iterate, number of iterations taken, and the true relative
        residual ``||M x - rhs|| / ||rhs||`` (recomputed, not the recurrence
        value).

    Raises
    ------
    CgBreakdownError
        If a search direction has non-positive curvature ``p' M p <= 0``,
        which signals an indefinite or broken operator.
    """
    rhs = _check_vec(system.rhs, system.n, "cg rhs")
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0 and x0 is None:
        return CgResult(np.zeros(system.n), 0, 0.0)

    x = np.zeros(system.n) if x0 is None else _check_vec(x0, system.n, "cg x0").copy()
    r = rhs - system.apply(x)
    p = r.copy()
    rs = float(r @ r)
    denom = rhs_norm if rhs_norm > 0.0 else 1.0

    k = 0
    for k in range(1, max_iter + 1):
        if np.sqrt(rs) <= tol * denom:
            k -= 1
            break
        mp = system.apply(p)
        curv = float(p @ mp)
        if curv <= 0.0:
            raise CgBreakdownError(
                f"cg breakdown at iteration {k}: direction curvature {curv:.3e} <= 0")
        alpha = rs / curv
        x += alpha * p
        r -= alpha * mp
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
        if callback is not None:
            callback(x.copy())

    relres = float(np.linalg.norm(system.apply(x) - rhs)) / denom
    return CgResult(x, k, relres)


def spectral_norm_estimate(op: LinearOperator, iters: int = 100, seed: int = 0) -> float:
    """Largest singular value of ``op`` by power iteration on ``A^T A``.

    Deterministic for a fixed seed.  Returns 0.0 for the zero operator.
    """
    op = as_operator(op)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.cols)
    nv = np.linalg.norm(v)
    if nv == 0.0 or op.cols == 0 or op.rows == 0:
        return 0.0
    v /= nv
    est = 0.0
    for _ in range(max(1, iters)):
        w = op.apply_transpose(op.apply(v))
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        est = np.sqrt(nw)
        v = w / nw
    return float(est)
