"""Fractional Riemann-Liouville integrals and Hermite-Hadamard certification."""

from ._core import (
    DivergentMomentError,
    DomainError,
    Error,
    EvaluationError,
    NonConvergenceError,
    OutOfRangeError,
    OverflowError,
    ParseError,
    StepUnderflowError,
    UsageError,
    beta,
    check_coordinate_h_convex,
    evaluate,
    format_expression,
    frac_integral_1d,
    frac_integral_2d,
    gamma,
    h_eval,
    h_moment,
    mixed_partial,
    power_h_kernel_moment_closed_form,
    power_h_mean_square_closed_form,
    power_h_moment_closed_form,
    run_cli,
    verify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
