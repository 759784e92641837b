"""Exceptions (:mod:`oica.core.errors`)
=======================================

All the exceptions raised by oica derive from :class:`OicaError`.
Those which signal a bad argument also derive from :class:`ValueError`.

"""


class OicaError(Exception):
    """Base class for all oica errors."""

    pass


class ZeroRow(OicaError, ValueError):
    """A basis row has (numerically) zero norm and cannot be normalized.
    This signals a degenerate optimizer state.
    """

    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__("Zero-norm basis rows: {:}".format(self.rows))


class InvalidEpsilon(OicaError, ValueError):
    """The regularization constant of a singular cost is not positive."""

    pass


class ShapeMismatch(OicaError, ValueError):
    pass


class NotPathological(OicaError, ValueError):
    """The basis is not M stacked copies of one orthonormal basis."""

    pass


class NonFiniteObjective(OicaError, ArithmeticError):
    """The objective or its gradient is not finite at the starting point."""

    pass


class ImageTooSmall(OicaError, ValueError):
    pass


class RankDeficient(OicaError, ValueError):
    """The data covariance has too many eigenvalues below the floor."""

    pass


class Singular(OicaError, ValueError):
    pass


class ConstantPatch(OicaError, ValueError):
    pass


class FitDiverged(OicaError):
    """No Gabor candidate beats the zero kernel: the patch is not Gabor-like."""

    pass
