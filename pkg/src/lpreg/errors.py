"""Exception types shared across the solvers."""


class SolverFailure(RuntimeError):
    """A solver could not continue; the message carries the iteration context."""


class CgBreakdownError(SolverFailure):
    """Conjugate gradients met a direction with non-positive curvature."""


class NonFiniteIterateError(SolverFailure):
    """An objective or iterate became NaN/inf during a solve."""
