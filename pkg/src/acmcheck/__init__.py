"""Numerical verification of identities for the semi-symmetric non-metric
connection B_X Y = D_X Y + 'F(X,Y) T on almost contact metric manifolds."""

from .fields import Chart, TensorField
from .structure import AlmostContactStructure, CheckReport, builtin, load_spec, validate_structure

__all__ = ["AlmostContactStructure", "Chart", "CheckReport", "TensorField", "builtin", "load_spec",
           "validate_structure"]
__version__ = "0.1.0"
