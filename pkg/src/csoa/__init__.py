"""Conservative primal-dual stochastic optimization with expectation constraints."""
from .core import (ConfigError, HyperParams, NumericalAbort, OracleEval, ProblemConstants,
                   SampleContext, SampleStream, SolverState, dual_grad_aug_lagrangian,
                   estimate_constants, primal_grad_aug_lagrangian)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "HyperParams", "NumericalAbort", "OracleEval", "ProblemConstants",
    "SampleContext", "SampleStream", "SolverState", "dual_grad_aug_lagrangian",
    "estimate_constants", "primal_grad_aug_lagrangian",
]
