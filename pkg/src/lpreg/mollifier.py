"""Gaussian-smoothed absolute value and the smooth objective built on it.

Convolving |t| with a Gaussian of width sigma has the closed form

    phi_sigma(t) = t erf(t / (sqrt(2) sigma))
                   + sqrt(2/pi) sigma exp(-t^2 / (2 sigma^2)),

an even, C^inf majorant of |t| with phi_sigma(0) = sqrt(2/pi) sigma and
derivative erf(t / (sqrt(2) sigma)).  Raising it to the p-th power yields the
everywhere-differentiable objective

    H(x) = ||Ax - b||_2^2 + lam * sum_k phi_sigma(x_k)^p

whose gradient and diagonal-plus-Gram Hessian are given in closed form below.
Three zero-corrected variants of phi are provided for callers that want
phi(0) = 0; the plain variant is the default since its strictly positive
minimum keeps negative powers of phi finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf as _erf

from .functional import Penalty
from .linop import as_operator

__all__ = [
    "SmoothAbs",
    "erf",
    "phi",
    "phi_prime",
    "phi_second",
    "eval_H",
    "grad_H",
    "hessian_penalty_diag",
    "apply_hessian",
    "grad_H_general",
    "apply_hessian_general",
]

VARIANTS = ("plain", "subtract_const", "subtract_gauss", "drop_term")

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class SmoothAbs:
    """Smoothing width and flavor of the mollified absolute value."""

    sigma: float
    variant: str = "plain"

    def __post_init__(self):
        # assertion, not a clamp: silently widening sigma would change the objective
        assert self.sigma >= 1e-10, f"sigma={self.sigma} below 1e-10"
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")


def erf(t):
    """Error function, elementwise; |error| <= 1e-12 over the real line."""
    return _erf(t)


def _gauss(t: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-t^2 / (2 sigma^2)) with the exponent clamped against underflow."""
    ex = -(t * t) / (2.0 * sigma * sigma)
    return np.exp(np.maximum(ex, -745.0))


def phi(t, s: SmoothAbs):
    """Smoothed |t| (scalar in, scalar out; arrays elementwise)."""
    t = np.asarray(t, dtype=np.float64)
    sig = s.sigma
    base_t = t * _erf(t / (np.sqrt(2.0) * sig))
    if s.variant == "drop_term":
        out = base_t
    else:
        out = base_t + _SQRT_2_OVER_PI * sig * _gauss(t, sig)
        if s.variant == "subtract_const":
            out = out - _SQRT_2_OVER_PI * sig
        elif s.variant == "subtract_gauss":
            out = out - _SQRT_2_OVER_PI * sig * np.exp(np.maximum(-(t * t), -745.0))
    return out if out.ndim else float(out)


def phi_prime(t, s: SmoothAbs):
    """d phi / dt for the chosen variant."""
    t = np.asarray(t, dtype=np.float64)
    sig = s.sigma
    core = _erf(t / (np.sqrt(2.0) * sig))
    if s.variant in ("plain", "subtract_const"):
        out = core
    elif s.variant == "subtract_gauss":
        out = core + _SQRT_2_OVER_PI * sig * 2.0 * t * np.exp(np.maximum(-(t * t), -745.0))
    else:  # drop_term
        out = core + t * _SQRT_2_OVER_PI * _gauss(t, sig) / sig
    return out if out.ndim else float(out)


def phi_second(t, s: SmoothAbs):
    """d^2 phi / dt^2 for the chosen variant."""
    t = np.asarray(t, dtype=np.float64)
    sig = s.sigma
    base = _SQRT_2_OVER_PI * _gauss(t, sig) / sig
    if s.variant in ("plain", "subtract_const"):
        out = base
    elif s.variant == "subtract_gauss":
        gt = np.exp(np.maximum(-(t * t), -745.0))
        out = base + _SQRT_2_OVER_PI * sig * (2.0 - 4.0 * t * t) * gt
    else:  # drop_term
        out = base * (2.0 - (t * t) / (sig * sig))
    return out if out.ndim else float(out)


def eval_H(A, b: np.ndarray, x: np.ndarray, pen: Penalty, s: SmoothAbs) -> float:
    """Smoothed objective ||Ax - b||_2^2 + lam * sum phi(x_k)^p."""
    A = as_operator(A)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    pv = phi(np.asarray(x, dtype=np.float64), s)
    return float(r @ r + pen.lam * np.sum(pv ** pen.p))


def grad_H(A, b: np.ndarray, x: np.ndarray, pen: Penalty, s: SmoothAbs) -> np.ndarray:
    """Gradient 2 A^T (Ax - b) + lam * p * phi^(p-1) * phi'.

    For the plain variant at p = 1 the penalty part is exactly
    lam * erf(x / (sqrt(2) sigma)).
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    v = _penalty_grad_vec(x, pen.p, s)
    return 2.0 * A.apply_transpose(r) + pen.lam * pen.p * v


def _penalty_grad_vec(x: np.ndarray, p: float, s: SmoothAbs) -> np.ndarray:
    pv = phi(x, s)
    dv = phi_prime(x, s)
    if p == 1.0:
        return np.asarray(dv, dtype=np.float64)
    return pv ** (p - 1.0) * dv


def hessian_penalty_diag(x: np.ndarray, pen: Penalty, s: SmoothAbs) -> np.ndarray:
    """Diagonal w of the penalty Hessian block (without the lam*p factor):

    w_j = (p-1) phi^(p-2) (phi')^2 + phi^(p-1) phi''.

    Finite everywhere for the plain variant since phi >= sqrt(2/pi) sigma > 0.
    """
    x = np.asarray(x, dtype=np.float64)
    pv = phi(x, s)
    dv = phi_prime(x, s)
    d2v = phi_second(x, s)
    p = pen.p
    if p == 1.0:
        return np.asarray(d2v, dtype=np.float64)
    if p == 2.0:
        return dv * dv + pv * d2v
    return (p - 1.0) * pv ** (p - 2.0) * dv * dv + pv ** (p - 1.0) * d2v


def apply_hessian(A, x_point: np.ndarray, pen: Penalty, s: SmoothAbs,
                  direction: np.ndarray) -> np.ndarray:
    """Hessian action (2 A^T A + lam p Diag(w)) @ direction at x_point."""
    A = as_operator(A)
    direction = np.asarray(direction, dtype=np.float64)
    w = hessian_penalty_diag(x_point, pen, s)
    return 2.0 * A.apply_transpose(A.apply(direction)) + pen.lam * pen.p * w * direction


def grad_H_general(A, b: np.ndarray, x: np.ndarray, pen: Penalty, s: SmoothAbs,
                   eps_r: float = 1e-6) -> np.ndarray:
    """Gradient with an l-norm data term, 1 <= l <= 2:

    A^T [ l * max(|r|, eps_r)^(l-2) * r ] + lam * p * phi^(p-1) * phi'.

    Reduces to grad_H exactly at l = 2 (the residual factor becomes 2).
    """
    A = as_operator(A)
    x = np.asarray(x, dtype=np.float64)
    r = A.apply(x) - np.asarray(b, dtype=np.float64)
    if pen.l == 2.0:
        data = 2.0 * A.apply_transpose(r)
    else:
        rw = pen.l * np.maximum(np.abs(r), eps_r) ** (pen.l - 2.0)
        data = A.apply_transpose(rw * r)
    v = _penalty_grad_vec(x, pen.p, s)
    return data + pen.lam * pen.p * v


def apply_hessian_general(A, b: np.ndarray, x_point: np.ndarray, pen: Penalty,
                          s: SmoothAbs, direction: np.ndarray,
                          eps_r: float = 1e-6) -> np.ndarray:
    """Curvature action for the l-norm data term:

    l * A^T [ max(|r(x)|, eps_r)^(l-2) * (A dir) ] + lam p Diag(w) dir,

    the Gauss-Newton-style counterpart of apply_hessian (equal to it at l=2).
    """
    A = as_operator(A)
    direction = np.asarray(direction, dtype=np.float64)
    w = hessian_penalty_diag(x_point, pen, s)
    pen_part = pen.lam * pen.p * w * direction
    if pen.l == 2.0:
        return 2.0 * A.apply_transpose(A.apply(direction)) + pen_part
    r = A.apply(np.asarray(x_point, dtype=np.float64)) - np.asarray(b, dtype=np.float64)
    rw = np.maximum(np.abs(r), eps_r) ** (pen.l - 2.0)
    return pen.l * A.apply_transpose(rw * A.apply(direction)) + pen_part
