"""Numerical toolkit for the general Ericksen-Leslie model of nematic
liquid crystal flow: operator assembly with anisotropic elasticity, symbol
ellipticity and boundary-compatibility certification, and a desk-scale
semi-implicit solver for the coupled incompressible system with the fully
nonlinear director boundary condition."""

from .coefficients import (
    ClassicalLeslieCoefficients,
    FrankCoefficients,
    LeslieCoefficients,
    ValidationReport,
    validate_consistency,
    validate_ericksen_inequalities,
    validate_frank,
)
from .fields import DirectorField, Grid, TensorField, VectorField, VelocityField, leray_project

__version__ = "0.1.0"

__all__ = [
    "ClassicalLeslieCoefficients",
    "FrankCoefficients",
    "LeslieCoefficients",
    "ValidationReport",
    "validate_consistency",
    "validate_ericksen_inequalities",
    "validate_frank",
    "DirectorField",
    "Grid",
    "TensorField",
    "VectorField",
    "VelocityField",
    "leray_project",
    "__version__",
]
