class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class DimensionError(GeometryError):
    pass


class OutsideDomainError(GeometryError):
    pass


class NonUniqueProjectionError(GeometryError):
    pass


class CollarError(GeometryError):
    """Point lies outside the collar where the boundary projection is trusted."""


class ConvergenceError(RuntimeError):
    pass


class UnsupportedDomainError(GeometryError):
    pass


class GraphDisconnectedError(RuntimeError):
    pass
