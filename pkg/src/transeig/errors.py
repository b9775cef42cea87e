"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration (bad schema, unknown key, out-of-range value)."""


class ExpressionError(ValueError):
    """Coefficient expression could not be parsed or evaluated.

    Carries the character position of the offending token when known.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class MeshingError(RuntimeError):
    """Mesh generation or refinement failed."""


class SolverError(RuntimeError):
    """Numerical failure in factorization or eigenvalue iteration."""
