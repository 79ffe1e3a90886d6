"""Nonlinear conjugate gradients on the mollified objective.

The non-smooth penalty is replaced by its Gaussian smoothing (see
:mod:`lpreg.mollifier`), minimized with Polak-Ribiere(+) conjugate
directions, and re-sharpened by shrinking the smoothing width sigma every
iteration.  A thresholding pass after each step keeps the iterate sparse, so
the method combines second-order-flavored steps with the support control of
proximal schemes.  Setting the direction memory to zero (``beta`` forced to
0) recovers smoothed steepest descent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteIterateError
from .functional import (Penalty, hard_threshold, lp_power_norm, optimality_prune,
                         soft_threshold)
from .linop import as_operator
from .mollifier import (SmoothAbs, apply_hessian, apply_hessian_general, eval_H,
                        grad_H, grad_H_general, phi)
from .trace import SolveTrace

__all__ = [
    "ConvCgConfig",
    "line_search_mu",
    "pr_beta",
    "sigma_update",
    "eval_H_general",
    "conv_cg_solve",
    "steepest_descent_solve",
]

THRESHOLD_MODES = ("soft", "hard", "optimality", "none")
# "distance_tied" is an accepted alias for "distance"
SIGMA_MODES = ("geometric", "distance", "distance_tied")
LINE_SEARCHES = ("taylor", "backtracking")


@dataclass
class ConvCgConfig:
    """Knobs of the smoothed-CG scheme.

    ``sigma0`` seeds the smoothing width, shrunk by ``sigma_rate`` per
    iteration (geometric mode) or tied to the step length (distance mode)
    and floored at ``sigma_floor``.  ``tau`` is the threshold level, default
    lam/2 (the fixed-point threshold of the l1 objective); each soft/hard
    thresholding pass applies the width min(tau, sigma) so the pruning never
    outruns what the current smoothing resolves.  ``threshold_every`` applies
    the threshold only every k-th iteration.
    """

    pen: Penalty
    iters: int = 100
    sigma0: float = 1.0
    sigma_rate: float = 0.8
    sigma_floor: float = 1e-6
    sigma_mode: str = "geometric"
    threshold_mode: str = "soft"
    tau: float | None = None
    threshold_every: int = 1
    line_search: str = "taylor"
    smooth_variant: str = "plain"
    eps_residual: float = 1e-6
    max_backtracks: int = 30

    def __post_init__(self):
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ValueError(f"sigma_mode must be one of {SIGMA_MODES}")
        if self.line_search not in LINE_SEARCHES:
            raise ValueError(f"line_search must be one of {LINE_SEARCHES}")
        if not (0.0 < self.sigma_rate < 1.0):
            raise ValueError(f"sigma_rate must lie in (0, 1), got {self.sigma_rate}")
        if self.sigma0 <= 0.0 or self.sigma_floor <= 0.0:
            raise ValueError("sigma0 and sigma_floor must be positive")
        if self.threshold_every < 1:
            raise ValueError("threshold_every must be >= 1")

    def tau_value(self) -> float:
        return 0.5 * self.pen.lam if self.tau is None else self.tau


def line_search_mu(grad: np.ndarray, s_dir: np.ndarray,
                   hess_apply: Callable[[np.ndarray], np.ndarray],
                   objective: Callable[[float], float] | None = None,
                   h0: float | None = None,
                   max_backtracks: int = 30) -> float:
    """Step length along s_dir.

    The primary rule is the second-order (Taylor) ratio

        mu = - <grad, s> / <s, hess_apply(s)>.

    When the curvature denominator is <= 1e-14 * ||s||^2 the routine falls
    back to backtracking from mu = 1 (mu = -1 for an ascent direction).  If
    ``objective`` (a map mu -> H(x + mu s)) is supplied, any candidate mu is
    additionally halved until the Armijo-style decrease

        H(x + mu s) <= H(x) - 1e-4 |mu| |<grad, s>|

    holds, returning 0.0 when ``max_backtracks`` halvings never achieve it.
    """
    g_dot_s = float(grad @ s_dir)
    s_norm2 = float(s_dir @ s_dir)
    if s_norm2 == 0.0:
        return 0.0
    den = float(s_dir @ hess_apply(s_dir))
    if den > 1e-14 * s_norm2:
        mu = -g_dot_s / den
    else:
        mu = 1.0 if g_dot_s <= 0.0 else -1.0
        if objective is None:
            return mu
    if objective is None:
        return mu
    if h0 is None:
        h0 = objective(0.0)
    dec = 1e-4 * abs(g_dot_s)
    for _ in range(max_backtracks + 1):
        if objective(mu) <= h0 - dec * abs(mu):
            return mu
        mu *= 0.5
    return 0.0


def pr_beta(g_new: np.ndarray, g_old: np.ndarray) -> float:
    """Polak-Ribiere(+) momentum max{<g_new, g_new - g_old> / ||g_old||^2, 0}."""
    denom = float(g_old @ g_old)
    if denom <= 0.0:
        return 0.0
    return max(float(g_new @ (g_new - g_old)) / denom, 0.0)


def sigma_update(sigma: float, cfg: ConvCgConfig, step_norm: float | None = None) -> float:
    """Next smoothing width; non-increasing, floored at cfg.sigma_floor."""
    if cfg.sigma_mode == "geometric":
        cand = cfg.sigma_rate * sigma
    else:  # distance / distance_tied
        if step_norm is None:
            return sigma
        cand = min(sigma, cfg.sigma_rate * step_norm)
    return max(cand, cfg.sigma_floor)


def eval_H_general(A, b: np.ndarray, x: np.ndarray, pen: Penalty, s: SmoothAbs) -> float:
    """Smoothed objective with l-norm data term: ||Ax-b||_l^l + lam sum phi^p."""
    if pen.l == 2.0:
        return eval_H(A, b, x, pen, s)
    A = as_operator(A)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    pv = phi(np.asarray(x, dtype=np.float64), s)
    return float(lp_power_norm(r, pen.l) + pen.lam * np.sum(pv ** pen.p))


def conv_cg_solve(A, b: np.ndarray, cfg: ConvCgConfig,
                  x0: np.ndarray | None = None,
                  _force_beta_zero: bool = False) -> tuple[np.ndarray, SolveTrace]:
    """Thresholded nonlinear CG on the shrinking-sigma smoothed objective.

    Per iteration: line search along the conjugate direction, threshold the
    stepped iterate at width min(tau, sigma), rebuild the direction from the
    gradient at the thresholded point (PR+ momentum, both gradients at the
    current sigma), then shrink sigma.  For p = 1 the direction is masked on
    settled zero coordinates (x_k = 0 with |grad_k| <= lam; the smoothed
    penalty has no slope at zero, so that bound certifies the coordinate as
    optimally zero).  Without the mask those coordinates load the step-length
    denominator with the near-origin penalty curvature, which grows like
    lam/sigma and freezes the step as sigma shrinks; a coordinate pruned too
    eagerly re-enters as soon as its data gradient exceeds lam.  Returns
    early once the gradient or the masked direction vanishes (converged).

    Trace fields: iter, F (exact objective), H (smoothed objective at the
    iteration's sigma), sigma, mu, beta, step_norm, nnz.

    Returns (x, trace).
    """
    A = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    pen = cfg.pen
    general = pen.l != 2.0
    tau = cfg.tau_value()

    x = np.zeros(A.cols) if x0 is None else np.asarray(x0, dtype=np.float64).copy()
    sigma = cfg.sigma0
    s_dir: np.ndarray | None = None
    trace = SolveTrace()

    for n in range(1, cfg.iters + 1):
        sm = SmoothAbs(sigma, cfg.smooth_variant)
        g = _grad(A, b, x, pen, sm, cfg, general)
        if not np.any(g):
            break
        if s_dir is None:
            s_dir = -g

        h_now = _h_val(A, b, x, pen, sm, general)

        def hess(v, _x=x, _sm=sm):
            if general:
                return apply_hessian_general(A, b, _x, pen, _sm, v, cfg.eps_residual)
            return apply_hessian(A, _x, pen, _sm, v)

        def along(mu, _x=x, _s=s_dir, _sm=sm):
            return _h_val(A, b, _x + mu * _s, pen, _sm, general)

        if cfg.line_search == "taylor":
            mu = line_search_mu(g, s_dir, hess, objective=along, h0=h_now,
                                max_backtracks=cfg.max_backtracks)
        else:
            mu = _pure_backtrack(g, s_dir, along, h_now, cfg.max_backtracks)

        stepped = x + mu * s_dir
        if n % cfg.threshold_every == 0:
            x_new = _apply_threshold(stepped, cfg.threshold_mode,
                                     min(tau, sigma), A, b, pen.lam)
        else:
            x_new = stepped

        g_new = _grad(A, b, x_new, pen, sm, cfg, general)
        beta = 0.0 if _force_beta_zero else pr_beta(g_new, g)
        s_dir = -g_new + beta * s_dir
        if pen.p == 1.0:
            # settled zeros: no smoothed-penalty slope at 0, so the gradient
            # there is pure data term and |g_k| <= lam is the stay-at-zero test
            settled = (x_new == 0.0) & (np.abs(g_new) <= pen.lam)
            s_dir = np.where(settled, 0.0, s_dir)
            if float(g_new @ s_dir) >= 0.0:
                s_dir = np.where(settled, 0.0, -g_new)

        f_val = lp_power_norm(A.apply(x_new) - b, pen.l) + pen.lam * lp_power_norm(x_new, pen.p)
        h_val = _h_val(A, b, x_new, pen, sm, general)
        if not (np.isfinite(f_val) and np.isfinite(h_val)):
            raise NonFiniteIterateError(f"objective became non-finite at iteration {n}")
        step_norm = float(np.linalg.norm(x_new - x))
        trace.append(iter=n, F=f_val, H=h_val, sigma=sigma, mu=mu, beta=beta,
                     step_norm=step_norm, nnz=int(np.count_nonzero(x_new)))

        sigma = sigma_update(sigma, cfg, step_norm=step_norm)
        x = x_new
        if not np.any(s_dir):
            break

    return x, trace


def steepest_descent_solve(A, b: np.ndarray, cfg: ConvCgConfig,
                           x0: np.ndarray | None = None) -> tuple[np.ndarray, SolveTrace]:
    """Same loop as conv_cg_solve with the direction memory switched off."""
    return conv_cg_solve(A, b, cfg, x0=x0, _force_beta_zero=True)


def _grad(A, b, x, pen, sm, cfg, general):
    if general:
        return grad_H_general(A, b, x, pen, sm, cfg.eps_residual)
    return grad_H(A, b, x, pen, sm)


def _h_val(A, b, x, pen, sm, general):
    if general:
        return eval_H_general(A, b, x, pen, sm)
    return eval_H(A, b, x, pen, sm)


def _apply_threshold(x, mode, tau, A, b, lam):
    if mode == "soft":
        return soft_threshold(x, tau)
    if mode == "hard":
        return hard_threshold(x, tau)
    if mode == "optimality":
        return optimality_prune(x, A, b, lam)
    return x


def _pure_backtrack(g, s_dir, objective, h0, max_backtracks):
    g_dot_s = float(g @ s_dir)
    mu = 1.0 if g_dot_s <= 0.0 else -1.0
    dec = 1e-4 * abs(g_dot_s)
    for _ in range(max_backtracks + 1):
        if objective(mu) <= h0 - dec * abs(mu):
            return mu
        mu *= 0.5
    return 0.0
