"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument violates an operation's precondition."""


class RankDeficiencyError(ValueError):
    """Requested more principal components than the data rank supports."""

    def __init__(self, requested, achieved):
        self.requested = requested
        self.achieved = achieved
        super().__init__(
            f"requested {requested} components but data rank is {achieved}"
        )


class ZeroBandwidthError(ValueError):
    """All points coincide, so no kernel bandwidth can be derived."""


class DisconnectedGraphError(RuntimeError):
    """The kernel graph has more than one connected component."""

    def __init__(self, n_components):
        self.n_components = n_components
        super().__init__(
            f"kernel graph is disconnected ({n_components} components); "
            "increase epsilon or the neighbor count"
        )


class NumericalError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)


class EmptyTripletsError(ValueError):
    """No factorization triplets survive the thresholds."""


class GraphSizeError(ValueError):
    """Instance too large for the exact Max-Cut solver."""


class InsufficientFactorsError(ValueError):
    """A factor group has fewer eigenvectors than the requested embedding."""
