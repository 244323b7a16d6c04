"""Laurent-series inversion of perturbed matrices and its statistical uses."""

from .errors import (AsymmetryError, DegenerateError, DimensionError, MathError,
                     NoInteriorMinimumError, NoPoleFoundError, NotPositiveDefiniteError,
                     NumericalBreakdownError, SingularPerturbationError, ValidityDiscError)
from .laurent import AnalyticMatrixSeries, LaurentSeries, invert_series, pole_order
from .linmodel import PerturbedDesign, fit, fit_singular

__version__ = "0.1.0"
