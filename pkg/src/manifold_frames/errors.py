"""Exception types raised across the package."""


class FrameError(Exception):
    """Base class for package errors."""


class FilterError(FrameError):
    pass


class ModelError(FrameError):
    """Malformed or inconsistent spectral model (e.g. bad mesh eigen-file)."""


class GridTooCoarse(ModelError):
    pass


class ScaleUnresolved(FrameError):
    def __init__(self, j, scale, spacing):
        self.j, self.scale, self.spacing = j, scale, spacing
        super().__init__(
            f"level j={j}: scale b*a^j={scale:.4g} is below 4x the node spacing {spacing:.4g}"
        )


class ConstraintViolation(FrameError):
    def __init__(self, j, k, which, detail=""):
        self.j, self.k, self.which = j, k, which
        msg = f"level j={j}, cell k={k} violates {which}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NotConverged(FrameError):
    def __init__(self, max_iter, residual):
        self.max_iter, self.residual = max_iter, residual
        super().__init__(f"no convergence after {max_iter} iterations (relative residual {residual:.3e})")


class MeanNotZero(FrameError):
    pass


class AdmissibilityViolation(FrameError):
    pass


class MatrixTooLarge(FrameError):
    pass
