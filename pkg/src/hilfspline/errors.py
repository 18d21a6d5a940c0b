"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class KnotMismatchError(ValueError):
    """Two splines that must share a knot collection do not."""


class DegenerateKnotsError(ValueError):
    """A knot rule would produce a zero-width interval."""


class NonFiniteError(ArithmeticError):
    """A computed value (coefficient, series term, grid value) is not finite."""


class ConvergenceError(RuntimeError):
    """Picard iteration on a knot did not reach the requested tolerance.

    Attributes
    ----------
    knot : int
        Index of the offending knot interval.
    iterations : int
        Number of iterations performed on it.
    last_change : float
        Sup-norm of the final coefficient update.
    contraction_factor : float
        Contraction diagnostic for that knot. Without a Lipschitz bound it
        is the observed ratio of the last two updates (``nan`` after a
        single iteration).
    """

    def __init__(self, knot, iterations, last_change, contraction_factor):
        self.knot = knot
        self.iterations = iterations
        self.last_change = last_change
        self.contraction_factor = contraction_factor
        super().__init__(
            f"Picard iteration did not converge on knot {knot} after {iterations} "
            f"iterations (last change {last_change:.3e}, "
            f"contraction factor {contraction_factor:.4g})"
        )
