"""Exact coordinator solvers for finite decentralized control problems with
n-step delayed sharing."""

from ._core import (
    BudgetExceeded,
    DomainError,
    InputError,
    PreconditionError,
    Problem,
    Solver,
    UnreachableObservation,
    brute_force,
    canonical_names,
    verify,
)

__all__ = [
    "BudgetExceeded",
    "DomainError",
    "InputError",
    "PreconditionError",
    "Problem",
    "Solver",
    "UnreachableObservation",
    "brute_force",
    "canonical_names",
    "verify",
]
