"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operands have incompatible dimensions."""


class ContractError(ValueError):
    """An input violates a documented precondition."""


class SingularMatrixError(ArithmeticError):
    """A matrix required to be positive definite is numerically singular."""


class ConfigurationError(ValueError):
    """A scenario or preset configuration is invalid or unsatisfiable."""


class InfeasibleError(ValueError):
    """A power budget or design constraint cannot be met."""
