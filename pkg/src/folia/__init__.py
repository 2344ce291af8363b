"""Exact computations with Lie n-algebroid presentations of singular foliations."""

from .algebroid import LieNAlgebroid, MissingBracket, Unchecked
from .graded import GradedBundle, Section
from .modular import assemble_report, modular_one_form
from .polycore import DifferentialForm, Poly, RatLogExpr, VectorField

__all__ = [
    "DifferentialForm",
    "GradedBundle",
    "LieNAlgebroid",
    "MissingBracket",
    "Poly",
    "RatLogExpr",
    "Section",
    "Unchecked",
    "VectorField",
    "assemble_report",
    "modular_one_form",
]

__version__ = "0.1.0"
