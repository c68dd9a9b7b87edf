"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument or configuration value violates its contract."""


class AmbiguousPeakError(ValueError):
    """A correlation has no unique maximum (all values equal)."""


class LagOutOfRangeError(IndexError):
    """A fractional lag lies outside the stored correlation range."""


class SingularGeometryError(ValueError):
    """The wheel layout does not admit a unique forward-kinematics solution."""


class NoSignalError(RuntimeError):
    """Every analysis frame fell below the energy floor."""
