"""Exception taxonomy shared by all modules.

The CLI maps these onto process exit codes: configuration problems exit
with 2, numerical failures with 3, failed acceptance-style checks with 4.
"""


class UsageError(ValueError):
    """A caller violated a documented precondition (bad orders, mixed base points)."""


class DomainError(ValueError):
    """An evaluation point lies outside the declared domain of a model."""


class NumericError(RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""


class GeometryError(ValueError):
    """An integration path or region is invalid (e.g. runs through a critical point)."""


class AssumptionError(ValueError):
    """Declared structural data violates the admissibility conditions."""
