"""Exception types raised by proxkit."""


class ProxkitError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(ProxkitError, ValueError):
    pass


class EmptyList(ProxkitError, ValueError):
    pass


class NoSubdiffOracle(ProxkitError):
    """The function carries neither a subdifferential oracle nor a smoothness tag."""


class EvalInfinite(ProxkitError):
    """The query point lies outside the effective domain (f(x) = +inf)."""


class NotFiniteValued(ProxkitError, ValueError):
    pass


class ImproperOnGrid(ProxkitError):
    """f is +inf at every node of the grid."""


class NotConvexTagged(ProxkitError, ValueError):
    pass


class NotC1Tagged(ProxkitError, ValueError):
    pass


class ThresholdViolated(ProxkitError, ValueError):
    """r does not exceed the estimated prox-boundedness threshold."""


class NonpositiveLambda(ProxkitError, ValueError):
    pass


class DegenerateBox(ProxkitError, ValueError):
    pass


class InvalidCertificate(ProxkitError, ValueError):
    """v_bar is not a subgradient at the base point, or eps/r are out of range."""


class SpecParseError(ProxkitError, ValueError):
    """Malformed piecewise-polynomial function spec."""


class OutsideDomain(ProxkitError, ValueError):
    """Query point or grid lies outside the oracle's sampling window."""
