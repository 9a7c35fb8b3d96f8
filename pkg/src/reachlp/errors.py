"""Exception hierarchy shared by all reachlp modules."""


class ReachError(Exception):
    """Base class for every error raised by reachlp."""


# linear programming
class LPError(ReachError):
    pass


class MalformedProblem(LPError):
    """Dimension mismatch or non-finite data in a linear program."""


class IterationLimit(LPError):
    """The simplex pivot count exceeded its cap."""


class NumericalError(LPError):
    """A reported optimum failed its own feasibility re-check."""


# geometry
class GeometryError(ReachError):
    pass


class TooFewNormals(GeometryError):
    pass


class AssumptionOneViolated(GeometryError):
    def __init__(self, report):
        self.report = report
        super().__init__(report.reason)


class EmptyPolytope(GeometryError):
    pass


class UnboundedPolytope(GeometryError):
    """Support LP unbounded: the normals do not positively span."""


class NormalMismatch(GeometryError):
    pass


class EmptyExtremeSet(GeometryError):
    def __init__(self, message, facet=None):
        self.facet = facet
        super().__init__(message)


# input documents
class SchemaError(ReachError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


class DimensionMismatch(ReachError):
    pass


# norms and error bounds
class NotContractive(ReachError):
    pass


class AssumptionTwoViolated(ReachError):
    pass


# dual reach LP
class DualUnbounded(ReachError):
    def __init__(self, message, ray=None):
        self.ray = ray
        super().__init__(message)


class InternalError(ReachError):
    pass


# iteration oracle
class NotConverged(ReachError):
    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)
