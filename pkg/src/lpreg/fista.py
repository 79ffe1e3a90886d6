"""Proximal-gradient baseline (ISTA) with Nesterov acceleration (FISTA).

Solves the l = 2, p = 1 instance min ||Ax - b||_2^2 + lam ||x||_1 by
soft-thresholded gradient steps.  Kept deliberately plain (constant step
1/L, no adaptive restart) so it is a fair per-iteration yardstick for the
reweighted and smoothed-CG schemes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteIterateError
from .functional import Penalty, lp_power_norm, soft_threshold
from .linop import as_operator, spectral_norm_estimate
from .trace import SolveTrace

__all__ = ["FistaConfig", "ista_step", "fista_solve"]


@dataclass
class FistaConfig:
    """Penalty (l = 2, p = 1 only), iteration count, and step control.

    The gradient step is ``step_scale / L`` with L = 2 ||A||_2^2 (estimated by
    power iteration when ``lipschitz`` is not given); ``step_scale`` must stay
    in (0, 1] so the step never exceeds 1/L.
    """

    pen: Penalty
    iters: int = 200
    step_scale: float = 1.0
    lipschitz: float | None = None

    def __post_init__(self):
        if self.pen.l != 2.0 or self.pen.p != 1.0:
            raise ValueError("fista handles the l=2, p=1 objective only")
        if not (0.0 < self.step_scale <= 1.0):
            raise ValueError(f"step_scale must lie in (0, 1], got {self.step_scale}")
        if self.lipschitz is not None and self.lipschitz <= 0.0:
            raise ValueError("lipschitz must be positive when given")


def ista_step(A, b: np.ndarray, x: np.ndarray, lam: float, step: float) -> np.ndarray:
    """One proximal gradient step S_(lam*step)(x - step * 2 A^T (Ax - b)).

    With ||A||_2 <= 1 and step = 1/2 this is the classic shrink of
    x + A^T b - A^T A x at level lam/2.
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    grad = 2.0 * A.apply_transpose(A.apply(x) - np.asarray(b, dtype=np.float64))
    return soft_threshold(x - step * grad, lam * step)


def fista_solve(A, b: np.ndarray, cfg: FistaConfig,
                x0: np.ndarray | None = None) -> tuple[np.ndarray, SolveTrace]:
    """Accelerated proximal gradient with the t-sequence momentum.

        t_(k+1) = (1 + sqrt(1 + 4 t_k^2)) / 2
        y       = x_k + ((t_k - 1)/t_(k+1)) (x_k - x_(k-1))

    Returns (x, trace); trace fields are iter, F, residual_norm_l,
    penalty_norm_p, nnz, matching the other solvers.
    """
    A = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    pen = cfg.pen

    L = cfg.lipschitz
    if L is None:
        nrm = spectral_norm_estimate(A, iters=100)
        L = 2.0 * nrm * nrm
    if L <= 0.0:
        L = 1.0  # zero operator: any step works, the shrink does everything
    step = cfg.step_scale / L

    x_prev = np.zeros(A.cols) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    y = x_prev.copy()
    t = 1.0
    trace = SolveTrace()
    x = x_prev

    for k in range(1, cfg.iters + 1):
        x = ista_step(A, b, y, pen.lam, step)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = x + ((t - 1.0) / t_next) * (x - x_prev)
        t = t_next

        res_pow = lp_power_norm(A.apply(x) - b, 2.0)
        pen_pow = lp_power_norm(x, 1.0)
        f_val = res_pow + pen.lam * pen_pow
        if not np.isfinite(f_val):
            raise NonFiniteIterateError(f"objective became non-finite at iteration {k}")
        trace.append(iter=k, F=f_val, residual_norm_l=np.sqrt(res_pow),
                     penalty_norm_p=pen_pow, nnz=int(np.count_nonzero(x)))
        x_prev = x

    return x, trace
