"""lpreg: solvers and experiment tooling for lp-regularized inverse problems.

Minimizes ||Ax - b||_l^l + lam ||x||_p^p for exponents in [1, 2] with three
interchangeable schemes (reweighted least squares with inner CG, nonlinear CG
on a Gaussian-smoothed objective, and an accelerated proximal-gradient
baseline), plus lambda-continuation/L-curve tooling and synthetic problem
generators.
"""

__version__ = "0.1.0"

from .continuation import (LCurve, curvature, default_lambda_range,
                           discrepancy_stop, lambda_grid, pick_corner,
                           run_continuation, write_lcurve_csv)
from .convcg import (ConvCgConfig, conv_cg_solve, line_search_mu, pr_beta,
                     sigma_update, steepest_descent_solve)
from .errors import CgBreakdownError, NonFiniteIterateError, SolverFailure
from .fista import FistaConfig, fista_solve, ista_step
from .functional import (Penalty, eval_flp, hard_threshold, lp_power_norm,
                         optimality_prune, soft_threshold)
from .io import (Bundle, load_bundle, read_matrix_mtx, read_vector,
                 save_bundle, write_matrix_mtx, write_vector)
from .irls import (IrlsConfig, IrlsState, build_penalty_diag,
                   build_residual_diag, eval_surrogate, irls_cg_solve,
                   irls_landweber_step, irls_weights, update_epsilon)
from .linop import (CallableOperator, CgResult, DenseOperator, LinearOperator,
                    SparseOperator, SpdSystem, as_operator, cg_solve,
                    spectral_norm_estimate)
from .mollifier import (SmoothAbs, apply_hessian, erf, eval_H, grad_H,
                        grad_H_general, hessian_penalty_diag, phi, phi_prime)
from .problems import (TomographyProblem, add_noise_and_outliers,
                       build_tomography, checkerboard, compose_awinv,
                       logspace_matrix, multiscale_model)
from .trace import SolveTrace
from .wavelets import (WaveletBasis, cdf97_forward, cdf97_inverse,
                       cdf97_inverse_adjoint)
