"""Regularization-path driving: lambda grids, warm-started continuation,
L-curve curvature and corner/discrepancy selection rules.

The L-curve lives in (log residual-norm, log penalty-norm) space, sampled on
a geometrically descending lambda grid.  Curvature is taken with respect to
log(lambda) by finite differences (central inside, one-sided at the ends) and
the corner is the interior curvature-magnitude maximum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .convcg import ConvCgConfig, conv_cg_solve, sigma_update
from .fista import FistaConfig, fista_solve
from .functional import Penalty, lp_power_norm
from .irls import IrlsConfig, irls_cg_solve
from .linop import as_operator, spectral_norm_estimate

__all__ = [
    "LCurve",
    "CornerResult",
    "DiscrepancyResult",
    "SOLVER_KINDS",
    "default_lambda_range",
    "lambda_grid",
    "run_continuation",
    "curvature",
    "pick_corner",
    "discrepancy_stop",
    "write_lcurve_csv",
    "read_lcurve_csv",
]

SOLVER_KINDS = ("irls-cg", "conv-cg", "fista")

_LOG_FLOOR = 1e-300  # keeps log() finite when a solution or residual is exactly zero


@dataclass
class LCurve:
    """Sampled regularization path.

    ``log_residual``/``log_penalty`` hold the natural logs of the l-norm of
    the residual and p-norm of the solution per lambda; ``fvals`` the exact
    objective at each lambda's final iterate; ``errors`` optional percent
    model errors vs a known truth; ``solutions`` the iterates when kept.
    """

    lambdas: np.ndarray
    log_residual: np.ndarray
    log_penalty: np.ndarray
    fvals: np.ndarray
    nnz: np.ndarray
    curvature: np.ndarray | None = None
    errors: np.ndarray | None = None
    solutions: list | None = None

    def __len__(self) -> int:
        return self.lambdas.size

    def residual_violations(self, rel_tol: float = 1e-6) -> np.ndarray:
        """Indices where the residual norm rose as lambda decreased."""
        r = np.exp(self.log_residual)
        bad = r[1:] > r[:-1] * (1.0 + rel_tol)
        return np.nonzero(bad)[0] + 1


@dataclass
class CornerResult:
    lam: float
    index: int
    distinct: bool


@dataclass
class DiscrepancyResult:
    lam: float
    index: int
    reached: bool


def default_lambda_range(A, b: np.ndarray) -> tuple[float, float]:
    """(lam_max, lam_min) = (||A^T b||_inf / 1.2, ||A^T b||_inf / 1e6)."""
    A = as_operator(A)
    m = float(np.max(np.abs(A.apply_transpose(np.asarray(b, dtype=np.float64)))))
    if m <= 0.0:
        raise ValueError("A^T b is zero; no meaningful lambda range exists")
    return m / 1.2, m / 1e6


def lambda_grid(lam_max: float, lam_min: float, count: int) -> np.ndarray:
    """Geometric grid from lam_max down to lam_min (inclusive), descending."""
    if not (lam_max > lam_min > 0.0):
        raise ValueError(f"need lam_max > lam_min > 0, got {lam_max}, {lam_min}")
    if count < 2:
        raise ValueError(f"count must be >= 2, got {count}")
    return np.geomspace(lam_max, lam_min, count)


def run_continuation(solver: str, A, b: np.ndarray, grid: np.ndarray,
                     iters_per_lambda: int, base_cfg=None,
                     x_true: np.ndarray | None = None,
                     model_map: Callable[[np.ndarray], np.ndarray] | None = None,
                     keep_solutions: bool = False,
                     warm_start: bool = True,
                     carry_schedule: bool = True) -> LCurve:
    """Sweep the lambda grid with warm starts, recording the L-curve.

    Parameters
    ----------
    solver : {"irls-cg", "conv-cg", "fista"}
    A, b : operator and data
    grid : descending lambda values
    iters_per_lambda : solver iterations spent at each lambda
    base_cfg : solver config whose penalty weight and iteration count are
        replaced per grid point; defaults to the solver's l=2, p=1 setup
    x_true : known truth for percent-error tracking (optional)
    model_map : map from solver variable to model space (e.g. wavelet
        synthesis) applied before comparing with x_true or storing solutions
    keep_solutions : keep every iterate (in model space) on the curve
    warm_start : start each lambda from the previous solution (x0=0 at the
        first); False restarts from zero every time
    carry_schedule : continue the smoothing schedule (irls epsilon, conv-cg
        sigma) across grid points instead of resetting it each lambda, so the
        smoothing keeps sharpening along the path the way it does within a
        single long solve.  Ignored when warm_start=False.
    """
    if solver not in SOLVER_KINDS:
        raise ValueError(f"solver must be one of {SOLVER_KINDS}, got {solver!r}")
    A = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-D array")
    if np.any(np.diff(grid) >= 0.0):
        raise ValueError("grid must be strictly descending")

    base_cfg = _default_cfg(solver) if base_cfg is None else base_cfg
    pen0 = base_cfg.pen
    # one spectral-norm estimate shared across the grid keeps fista's step fixed
    fista_L = None
    if solver == "fista" and getattr(base_cfg, "lipschitz", None) is None:
        nrm = spectral_norm_estimate(A, iters=100)
        fista_L = 2.0 * nrm * nrm

    n_pts = grid.size
    log_res = np.empty(n_pts)
    log_pen = np.empty(n_pts)
    fvals = np.empty(n_pts)
    nnz = np.empty(n_pts, dtype=np.int64)
    errors = np.empty(n_pts) if x_true is not None else None
    solutions = [] if keep_solutions else None

    carry = carry_schedule and warm_start
    x = None
    eps_carry: float | None = None
    sigma_carry: float | None = None
    for i, lam in enumerate(grid):
        pen = replace(pen0, lam=float(lam))
        cfg = replace(base_cfg, pen=pen, iters=iters_per_lambda)
        if solver == "fista" and fista_L is not None:
            cfg = replace(cfg, lipschitz=fista_L)
        if carry:
            if solver == "irls-cg" and eps_carry is not None:
                cfg = replace(cfg, eps0=eps_carry)
            elif solver == "conv-cg" and sigma_carry is not None:
                cfg = replace(cfg, sigma0=sigma_carry)
        x0 = x if warm_start else None
        x, tr = _SOLVES[solver](A, b, cfg, x0)
        if carry and len(tr.records) > 0:
            last = tr.final()
            if solver == "irls-cg":
                eps_carry = float(last["eps"])  # recorded post-update
            elif solver == "conv-cg":
                sigma_carry = sigma_update(float(last["sigma"]), cfg,
                                           step_norm=float(last["step_norm"]))

        r = A.apply(x) - b
        res_pow = lp_power_norm(r, pen.l)
        pen_pow = lp_power_norm(x, pen.p)
        log_res[i] = np.log(max(res_pow ** (1.0 / pen.l), _LOG_FLOOR))
        log_pen[i] = np.log(max(pen_pow ** (1.0 / pen.p), _LOG_FLOOR))
        fvals[i] = res_pow + lam * pen_pow
        nnz[i] = int(np.count_nonzero(x))

        model = x if model_map is None else model_map(x)
        if errors is not None:
            denom = float(np.linalg.norm(x_true))
            errors[i] = 100.0 * float(np.linalg.norm(model - x_true)) / max(denom, _LOG_FLOOR)
        if solutions is not None:
            solutions.append(model.copy())

    return LCurve(lambdas=grid.copy(), log_residual=log_res, log_penalty=log_pen,
                  fvals=fvals, nnz=nnz, errors=errors, solutions=solutions)


def _default_cfg(solver: str):
    pen = Penalty(lam=1.0, l=2.0, p=1.0)
    if solver == "irls-cg":
        return IrlsConfig(pen=pen)
    if solver == "conv-cg":
        return ConvCgConfig(pen=pen)
    return FistaConfig(pen=pen)


_SOLVES = {
    "irls-cg": lambda A, b, cfg, x0: irls_cg_solve(A, b, cfg, x0=x0),
    "conv-cg": lambda A, b, cfg, x0: conv_cg_solve(A, b, cfg, x0=x0),
    "fista": lambda A, b, cfg, x0: fista_solve(A, b, cfg, x0=x0),
}


def curvature(lc: LCurve) -> np.ndarray:
    """Signed curvature of the L-curve parameterized by log(lambda).

    kappa = (x' y'' - x'' y') / (x'^2 + y'^2)^(3/2) with x = log residual,
    y = log penalty; derivatives by np.gradient (central differences inside,
    one-sided at the endpoints).  Stored on the curve and returned.
    """
    if len(lc) < 5:
        raise ValueError(f"need at least 5 grid points for curvature, got {len(lc)}")
    u = np.log(lc.lambdas)
    x1 = np.gradient(lc.log_residual, u)
    y1 = np.gradient(lc.log_penalty, u)
    x2 = np.gradient(x1, u)
    y2 = np.gradient(y1, u)
    denom = (x1 * x1 + y1 * y1) ** 1.5
    with np.errstate(invalid="ignore", divide="ignore"):
        kap = np.where(denom > 0.0, (x1 * y2 - x2 * y1) / denom, 0.0)
    lc.curvature = kap
    return kap


def pick_corner(lc: LCurve) -> CornerResult:
    """Interior maximizer of |curvature|; flags curves with no clear corner.

    Ties break toward larger lambda (the grid is descending, so the first
    maximum wins).  A curve whose interior curvature is flat, or everywhere
    negligible, is reported with distinct=False and its largest-lambda
    interior index.
    """
    kap = lc.curvature if lc.curvature is not None else curvature(lc)
    interior = np.abs(kap[1:-1])
    kmax = float(np.max(interior))
    kmin = float(np.min(interior))
    idx = 1 + int(np.argmax(interior))
    distinct = kmax > 1e-8 and (kmax - kmin) > 1e-8 * max(kmax, 1.0)
    if not distinct:
        idx = 1
    return CornerResult(lam=float(lc.lambdas[idx]), index=idx, distinct=distinct)


def discrepancy_stop(lc: LCurve, noise_norm: float) -> DiscrepancyResult:
    """First grid point (descending lambda) whose residual norm <= noise_norm.

    When no point qualifies the last index is returned with reached=False.
    """
    res = np.exp(lc.log_residual)
    hits = np.nonzero(res <= noise_norm)[0]
    if hits.size == 0:
        return DiscrepancyResult(lam=float(lc.lambdas[-1]), index=len(lc) - 1, reached=False)
    i = int(hits[0])
    return DiscrepancyResult(lam=float(lc.lambdas[i]), index=i, reached=True)


def write_lcurve_csv(path, lc: LCurve) -> None:
    """Delimited dump: lambda, log_residual, log_penalty, curvature,
    percent_error (blank when unknown), nnz."""
    kap = lc.curvature if lc.curvature is not None else curvature(lc)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["lambda", "log_residual", "log_penalty", "curvature",
                     "percent_error", "nnz"])
        for i in range(len(lc)):
            err = "" if lc.errors is None else f"{lc.errors[i]:.10g}"
            wr.writerow([f"{lc.lambdas[i]:.12g}", f"{lc.log_residual[i]:.12g}",
                         f"{lc.log_penalty[i]:.12g}", f"{kap[i]:.12g}",
                         err, int(lc.nnz[i])])


def read_lcurve_csv(path) -> LCurve:
    """Inverse of write_lcurve_csv (errors column optional per row)."""
    lam, lres, lpen, kap, errs, nnz = [], [], [], [], [], []
    have_err = False
    with open(path, "r", newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        next(rd)  # header
        for row in rd:
            lam.append(float(row[0]))
            lres.append(float(row[1]))
            lpen.append(float(row[2]))
            kap.append(float(row[3]))
            if row[4] != "":
                have_err = True
                errs.append(float(row[4]))
            else:
                errs.append(np.nan)
            nnz.append(int(row[5]))
    lc = LCurve(lambdas=np.array(lam), log_residual=np.array(lres),
                log_penalty=np.array(lpen), fvals=np.full(len(lam), np.nan),
                nnz=np.array(nnz, dtype=np.int64), curvature=np.array(kap),
                errors=np.array(errs) if have_err else None)
    return lc
