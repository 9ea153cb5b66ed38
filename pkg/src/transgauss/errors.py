"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for runtime geometry failures."""


class DomainError(GeometryError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class AntipodalPoints(GeometryError):
    pass


class OutOfDomain(GeometryError):
    """A point lies outside the domain of a translational structure."""


class ImmersionDegenerate(GeometryError):
    pass


class EigenSolveFailure(GeometryError):
    pass


class OddDimension(GeometryError, ValueError):
    pass


class NotRegularValue(GeometryError):
    pass


class ConvergenceFailure(GeometryError):
    pass


class UnknownTopology(GeometryError):
    pass


class DegenerateConfiguration(GeometryError):
    """No cap smaller than a hemisphere is determined by the samples."""


class OutsideHemisphere(GeometryError):
    pass


class NotInHemisphere(GeometryError):
    pass


class GKVanishes(GeometryError):
    pass


class MixedCurvatureSigns(GeometryError):
    pass


class NoAdmissibleT(GeometryError):
    pass


class EmptyIntersection(GeometryError):
    pass
