"""Exception types shared across the package."""


class DomainError(ValueError):
    """Invalid input: a documented precondition or schema is violated."""


class SolverError(RuntimeError):
    """Numerical failure inside a solver (lost bracketing, residual blow-up)."""
