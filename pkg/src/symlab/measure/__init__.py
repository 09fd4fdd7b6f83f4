"""Exact BV calculus for synthetic fields and the slicing identities."""
from .field import (
    FieldTerm,
    MeasureRep,
    MeasureTerm,
    SyntheticField,
    apply_operator_analytic,
    finite_difference_crosscheck,
    gradient_field,
    load_field,
)
from .geometry import area_function, line_box_interval, slice_area
from .profile import BVProfile1D, bv1d_measure, cantor_poly_integral
from .verify import (
    DegenerateSlicingWarning,
    section_value,
    verify_hyperplane_slicing,
    verify_jump_density,
    verify_line_slicing,
)

__all__ = [
    "BVProfile1D",
    "DegenerateSlicingWarning",
    "FieldTerm",
    "MeasureRep",
    "MeasureTerm",
    "SyntheticField",
    "apply_operator_analytic",
    "area_function",
    "bv1d_measure",
    "cantor_poly_integral",
    "finite_difference_crosscheck",
    "gradient_field",
    "line_box_interval",
    "load_field",
    "section_value",
    "slice_area",
    "verify_hyperplane_slicing",
    "verify_jump_density",
    "verify_line_slicing",
]
