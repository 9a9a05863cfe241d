"""Exception hierarchy shared by all modules."""


class FracDPError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(FracDPError, ValueError):
    pass


class SizeLimitError(FracDPError):
    """An instance exceeds a configured size or search budget."""


class NotAcyclicError(FracDPError, ValueError):
    pass


class ParityConflictError(FracDPError):
    """Two directed paths of different parity join the same pair of vertices.

    ``witness`` holds ``(u, v, odd_path, even_path)``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class UnsupportedError(FracDPError):
    pass


class NormalizeRequiresPerfectError(FracDPError, ValueError):
    pass


class InvalidOrderError(FracDPError, ValueError):
    pass


class OrientationMismatchError(FracDPError, ValueError):
    pass


class OutOfScopeError(FracDPError, ValueError):
    """Arguments fall outside the hypotheses of the bound being evaluated."""


class FormatError(FracDPError, ValueError):
    """Malformed graph, digraph, cover or hypergraph text."""
