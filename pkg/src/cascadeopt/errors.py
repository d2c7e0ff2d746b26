"""Exception hierarchy shared by all modules."""


class CascadeOptError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CascadeOptError, ValueError):
    """A configuration value violates its documented invariant."""


class InvalidDegreeError(ConfigError):
    """A requested degree cannot be realised on the given node count."""


class InvalidNodeError(CascadeOptError, KeyError):
    """A node id does not exist in the graph."""

    def __str__(self):
        return Exception.__str__(self)


class DomainError(CascadeOptError, ValueError):
    """A message or preference field lies outside its allowed domain."""


class DegenerateNetworkError(CascadeOptError):
    """The network has no usable nodes (e.g. every node was isolated)."""


class GridTooLargeError(CascadeOptError, ValueError):
    """A genome grid is too large to enumerate exhaustively."""

    def __init__(self, size, limit):
        super().__init__(f"grid has {size} points, limit is {limit}")
        self.size = size
        self.limit = limit
