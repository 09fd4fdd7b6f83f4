"""Symbol calculus, structural classification and slicing checks for
homogeneous constant-coefficient differential operators."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AnomalyError,
    FieldSpecError,
    InvalidDimensionError,
    NotEllipticError,
    NumericalDegeneracyError,
    OperatorSpecError,
    SymlabError,
    UnsupportedOrderError,
)
from .operators import Operator, catalog, load_operator  # noqa: E402

__all__ = [
    "AnomalyError",
    "FieldSpecError",
    "InvalidDimensionError",
    "NotEllipticError",
    "NumericalDegeneracyError",
    "Operator",
    "OperatorSpecError",
    "SymlabError",
    "UnsupportedOrderError",
    "__version__",
    "catalog",
    "load_operator",
]
