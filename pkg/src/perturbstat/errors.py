"""Exception hierarchy.

Everything deriving from :class:`MathError` is a property of the numbers
(singularity, degeneracy, domain), as opposed to malformed input.  The CLI
maps the former to exit status 2 and the latter to exit status 1.
"""


class DimensionError(ValueError):
    pass


class MathError(ArithmeticError):
    pass


class NotPositiveDefiniteError(MathError):
    pass


class AsymmetryError(MathError):
    pass


class NoPoleFoundError(MathError):
    """A(eps) looks singular for every eps up to the search cap."""


class SingularPerturbationError(MathError):
    """The Gram series is singular at eps = 0; use the singular-fit path."""


class DegenerateError(MathError):
    pass


class NumericalBreakdownError(MathError):
    pass


class ValidityDiscError(MathError):
    """eps lies outside the region where the expansion means anything."""


class NoInteriorMinimumError(MathError):
    pass
