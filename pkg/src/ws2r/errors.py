"""Exception types shared across the package."""


class Ws2rError(Exception):
    """Base class for all package-specific errors."""


class DegenerateFrame(Ws2rError):
    """A squared distance required as a denominator is (numerically) zero."""


class NotEmbeddable(Ws2rError):
    """A distance set admits no 3-space realization within tolerance."""

    def __init__(self, simplex: str, value: float, tolerance: float):
        self.simplex = simplex
        self.value = value
        self.tolerance = tolerance
        super().__init__(
            f"distance set not embeddable: {simplex} determinant "
            f"{value:.6g} < -{tolerance:.6g}"
        )


class IllConditioned(Ws2rError):
    """A linear system is too ill-conditioned to trust (degenerate basis)."""


class NonUnitAxis(Ws2rError):
    """Rotation axis direction is not unit length."""


class DegenerateAxis2(Ws2rError):
    """The two points defining the second joint axis coincide."""


class ResidualBoundExceeded(Ws2rError):
    """A generated cloud violates its declared surface-residual bound."""


class MissingMarker(Ws2rError):
    """A marker frame lacks one of the required labeled points."""


class DegenerateCloud(Ws2rError):
    """A point cloud is too degenerate (collinear/coplanar) for the fit."""


class NotAxisymmetric(Ws2rError):
    """A cloud shows azimuthal structure incompatible with a revolved fit."""
