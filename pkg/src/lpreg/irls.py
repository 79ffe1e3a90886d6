"""Iteratively reweighted least squares with inner conjugate-gradient solves.

Each outer sweep freezes the smoothed-penalty weights

    w_k = (x_k^2 + eps^2)^(-(2-p)/2)

and the residual reweighting R_i = max(|r_i|, eps_r)^(l-2), then takes a few
warm-started CG steps on the stationarity system

    (A^T R A + diag(lam * p * w / l)) x = A^T R b.

For l = 2 this is exactly the quadratic-surrogate system with penalty
diagonal lam*p*w/2, so l = p = 2 reproduces Tikhonov regularization to solver
tolerance.  The smoothing parameter eps decreases between sweeps on one of
three schedules (fixed, iterate-distance, surrogate-gap) and is never allowed
below ``eps_floor``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteIterateError
from .functional import Penalty, lp_power_norm
from .linop import SpdSystem, as_operator, cg_solve
from .trace import SolveTrace

__all__ = [
    "IrlsConfig",
    "IrlsState",
    "irls_weights",
    "build_penalty_diag",
    "build_residual_diag",
    "update_epsilon",
    "eval_surrogate",
    "irls_landweber_step",
    "irls_landweber_solve",
    "irls_cg_solve",
]

EPS_MODES = ("fixed", "distance", "surrogate_gap")


@dataclass
class IrlsConfig:
    """Knobs of the reweighted scheme.

    ``iters`` outer sweeps of ``inner_iters`` CG steps each; ``eps0`` in
    (0, 1) seeds the smoothing schedule chosen by ``eps_mode``.  ``alpha``
    is the additive offset of the distance schedule and the decaying base of
    the surrogate-gap schedule; ``gamma`` (surrogate-gap exponent) defaults
    to half its admissible upper bound 2/(4 - p^2).
    """

    pen: Penalty
    iters: int = 50
    inner_iters: int = 5
    eps0: float = 0.5
    eps_mode: str = "distance"
    alpha: float = 0.1
    gamma: float | None = None
    eps_floor: float = 1e-8
    eps_residual: float = 1e-6
    cg_tol: float = 1e-12

    def __post_init__(self):
        if self.eps_mode not in EPS_MODES:
            raise ValueError(f"eps_mode must be one of {EPS_MODES}, got {self.eps_mode!r}")
        if not (0.0 < self.eps0 < 1.0):
            raise ValueError(f"eps0 must lie in (0, 1), got {self.eps0}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.gamma is not None:
            bound = 2.0 / (4.0 - self.pen.p ** 2)
            if not (0.0 < self.gamma < bound):
                raise ValueError(f"gamma must lie in (0, {bound}), got {self.gamma}")

    def gap_exponent(self) -> float:
        if self.gamma is not None:
            return self.gamma
        return 1.0 / (4.0 - self.pen.p ** 2)


@dataclass
class IrlsState:
    """Mutable per-solve state threaded through the epsilon update."""

    x: np.ndarray
    eps: float
    weights: np.ndarray | None = None
    d_diag: np.ndarray | None = None
    r_diag: np.ndarray | None = None
    iteration: int = 0
    prev_x: np.ndarray | None = None
    surrogates: list = field(default_factory=list)


def irls_weights(x: np.ndarray, eps: float, p: float) -> np.ndarray:
    """Smoothed lp weights w_k = (x_k^2 + eps^2)^(-(2-p)/2); all ones at p=2."""
    x = np.asarray(x, dtype=np.float64)
    if p == 2.0:
        return np.ones_like(x)
    return (x * x + eps * eps) ** (-(2.0 - p) / 2.0)


def build_penalty_diag(w: np.ndarray, pen: Penalty) -> np.ndarray:
    """Diagonal d_k = sqrt(lam * p * w_k / 2) of the quadratic-penalty factor."""
    return np.sqrt(0.5 * pen.lam * pen.p * np.asarray(w, dtype=np.float64))


def build_residual_diag(r: np.ndarray, l: float, eps_r: float = 1e-6) -> np.ndarray:
    """Residual reweighting R_i = max(|r_i|, eps_r)^(l-2); all ones at l=2."""
    r = np.asarray(r, dtype=np.float64)
    if l == 2.0:
        return np.ones_like(r)
    return np.maximum(np.abs(r), eps_r) ** (l - 2.0)


def eval_surrogate(A, b: np.ndarray, x: np.ndarray, w: np.ndarray,
                   eps: float, pen: Penalty) -> float:
    """Quadratic-in-x majorizer of the smoothed objective at frozen weights.

    G = ||Ax-b||_2^2 + lam * sum_k [p w_k (x_k^2 + eps^2) + (2-p) w_k^(p/(p-2))].

    At the tight weights w = irls_weights(x, eps, p) this collapses to
    ||Ax-b||_2^2 + 2 lam sum_k (x_k^2 + eps^2)^(p/2).
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    p = pen.p
    quad = p * np.sum(w * (x * x + eps * eps))
    if p == 2.0:
        const = 0.0  # the (2-p) factor kills the conjugate term
    else:
        const = (2.0 - p) * np.sum(w ** (p / (p - 2.0)))
    return float(r @ r + pen.lam * (quad + const))


def update_epsilon(state: IrlsState, cfg: IrlsConfig) -> float:
    """Next smoothing parameter; non-increasing and clamped at cfg.eps_floor.

    distance mode:       min(eps, sqrt(||x - prev_x||_2 + alpha))
    surrogate_gap mode:  min(eps, |G_(n-2) - G_(n-1)|^(gamma/2) + alpha^n)
    fixed mode:          eps unchanged.
    """
    eps = state.eps
    if cfg.eps_mode == "fixed":
        return eps
    if cfg.eps_mode == "distance":
        if state.prev_x is None:
            return max(eps, cfg.eps_floor)
        dist = float(np.linalg.norm(state.x - state.prev_x))
        cand = np.sqrt(dist + cfg.alpha)
    else:  # surrogate_gap
        if len(state.surrogates) < 2:
            return max(eps, cfg.eps_floor)
        gap = abs(state.surrogates[-2] - state.surrogates[-1])
        cand = gap ** (0.5 * cfg.gap_exponent()) + cfg.alpha ** max(state.iteration, 1)
    return float(max(min(eps, cand), cfg.eps_floor))


def irls_landweber_step(A, b: np.ndarray, x: np.ndarray, w: np.ndarray,
                        pen: Penalty) -> np.ndarray:
    """One damped Landweber sweep at frozen weights; needs ||A||_2 <= 1.

    x_k <- (x_k - (A^T A x)_k + (A^T b)_k) / (1 + lam * p * w_k / 2)
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    grad_part = x - A.apply_transpose(A.apply(x)) + A.apply_transpose(np.asarray(b, dtype=np.float64))
    return grad_part / (1.0 + 0.5 * pen.lam * pen.p * np.asarray(w, dtype=np.float64))


def irls_landweber_solve(A, b: np.ndarray, cfg: IrlsConfig,
                         x0: np.ndarray | None = None,
                         op_norm: float | None = None) -> tuple[np.ndarray, SolveTrace]:
    """Run the Landweber variant, rescaling so the step contraction holds.

    The problem is solved as (A/s, b/s, lam/s^2) with s the spectral norm of
    A (plus a tiny margin), which leaves the minimizer unchanged while
    guaranteeing ||A/s||_2 <= 1.  Only l = 2 residuals are supported here;
    the CG variant handles general l.
    """
    from .linop import spectral_norm_estimate

    A = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    if cfg.pen.l != 2.0:
        raise ValueError("landweber scheme is defined for l = 2 only")
    s = op_norm if op_norm is not None else spectral_norm_estimate(A, iters=200)
    s = max(s * (1.0 + 1e-12), 1e-300)
    b_s = b / s
    pen_s = Penalty(cfg.pen.lam / (s * s), cfg.pen.l, cfg.pen.p, cfg.pen.allow_nonconvex)

    from .linop import CallableOperator
    A_s = CallableOperator(A.rows, A.cols,
                           lambda v: A.apply(v) / s,
                           lambda u: A.apply_transpose(u) / s)

    x = np.zeros(A.cols) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    state = IrlsState(x=x, eps=cfg.eps0)
    trace = SolveTrace()
    for n in range(1, cfg.iters + 1):
        w = irls_weights(state.x, state.eps, cfg.pen.p)
        if cfg.eps_mode == "surrogate_gap":
            state.surrogates.append(eval_surrogate(A_s, b_s, state.x, w, state.eps, pen_s))
        x_new = irls_landweber_step(A_s, b_s, state.x, w, pen_s)
        state.prev_x, state.x, state.iteration = state.x, x_new, n
        state.eps = update_epsilon(state, cfg)
        _record(trace, A, b, state, cfg.pen, n)
    return state.x, trace


def irls_cg_solve(A, b: np.ndarray, cfg: IrlsConfig,
                  x0: np.ndarray | None = None) -> tuple[np.ndarray, SolveTrace]:
    """Reweighted scheme with inner CG on the stationarity system.

    Parameters
    ----------
    A : operator or array
        Forward map (any spectral norm; no rescaling needed here).
    b : ndarray
        Data vector.
    cfg : IrlsConfig
        Penalty, sweep counts and epsilon schedule.
    x0 : ndarray, optional
        Warm start, also used to warm-start the first inner CG solve.

    Returns
    -------
    (x, trace)
        Final iterate and per-sweep trace with fields
        iter, F, residual_norm_l, penalty_norm_p, eps, nnz.
    """
    A = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    pen = cfg.pen
    l, p, lam = pen.l, pen.p, pen.lam

    x = np.zeros(A.cols) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    state = IrlsState(x=x, eps=cfg.eps0)
    trace = SolveTrace()

    for n in range(1, cfg.iters + 1):
        w = irls_weights(state.x, state.eps, p)
        state.weights = w
        state.d_diag = build_penalty_diag(w, pen)
        if cfg.eps_mode == "surrogate_gap":
            state.surrogates.append(eval_surrogate(A, b, state.x, w, state.eps, pen))

        if l == 2.0:
            rdiag = None
            rhs = A.apply_transpose(b)
        else:
            r = A.apply(state.x) - b
            rdiag = build_residual_diag(r, l, cfg.eps_residual)
            state.r_diag = rdiag
            rhs = A.apply_transpose(rdiag * b)
        pdiag = lam * p * w / l

        if rdiag is None:
            def matvec(v, _d=pdiag):
                return A.apply_transpose(A.apply(v)) + _d * v
        else:
            def matvec(v, _d=pdiag, _r=rdiag):
                return A.apply_transpose(_r * A.apply(v)) + _d * v

        sol = cg_solve(SpdSystem(n=A.cols, apply=matvec, rhs=rhs),
                       x0=state.x, max_iter=cfg.inner_iters, tol=cfg.cg_tol)
        state.prev_x, state.x, state.iteration = state.x, sol.x, n
        state.eps = update_epsilon(state, cfg)
        _record(trace, A, b, state, pen, n)

    return state.x, trace


def _record(trace: SolveTrace, A, b, state: IrlsState, pen: Penalty, n: int) -> None:
    r = as_operator(A).apply(state.x) - b
    res_pow = lp_power_norm(r, pen.l)
    pen_pow = lp_power_norm(state.x, pen.p)
    f_val = res_pow + pen.lam * pen_pow
    if not np.isfinite(f_val):
        raise NonFiniteIterateError(f"objective became non-finite at outer iteration {n}")
    trace.append(iter=n, F=f_val,
                 residual_norm_l=res_pow ** (1.0 / pen.l),
                 penalty_norm_p=pen_pow ** (1.0 / pen.p),
                 eps=state.eps, nnz=int(np.count_nonzero(state.x)))
