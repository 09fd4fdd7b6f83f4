"""Exception hierarchy shared by all symlab modules."""


class SymlabError(Exception):
    """Base class for all library errors."""


class InvalidDimensionError(SymlabError, ValueError):
    pass


class OperatorSpecError(SymlabError, ValueError):
    """Malformed operator data (bad shapes, all-zero coefficients, unknown catalog name)."""


class UnsupportedOrderError(SymlabError, NotImplementedError):
    pass


class NotEllipticError(SymlabError):
    pass


class NumericalDegeneracyError(SymlabError):
    pass


class AnomalyError(SymlabError):
    """A search failed where the theory guarantees existence."""


class FieldSpecError(SymlabError, ValueError):
    pass
