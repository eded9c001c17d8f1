"""Exception taxonomy shared by all plimit modules."""


class PlimitError(ValueError):
    """Base class for all plimit errors."""


class DomainError(PlimitError):
    """An evaluation argument violates a pointwise precondition (e.g. E < 0)."""


class RegionError(PlimitError):
    """A point or element lies outside the region an object is defined on."""


class ParameterError(PlimitError):
    """A construction parameter violates its stated bounds."""


class RangeError(PlimitError):
    """A requested construction overflows the representable range."""

    def __init__(self, message: str, achieved: int | None = None):
        super().__init__(message)
        self.achieved = achieved


class ShapeError(PlimitError):
    """Array sizes do not match the mesh or each other."""


class TagError(PlimitError):
    """Unknown boundary tag."""


class MeshError(PlimitError):
    """A mesh violates a structural invariant."""


class ConfigError(PlimitError):
    """Invalid configuration. Collects every violation, not just the first."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class UnsupportedError(PlimitError):
    """A requested combination is outside the tool's scope."""
