"""Exception types shared across the package."""


class GeometryMismatchError(ValueError):
    """A fitted-interface request does not line up with the mesh."""


class DegenerateElementError(ValueError):
    """A triangle has (numerically) zero area."""


class DegenerateCutError(ValueError):
    """A level set vanishes on an entire element, so the cut is ambiguous."""


class SingularSystemError(RuntimeError):
    """A factorization hit a zero pivot.

    ``pivot_index`` is the offending pivot when it could be located,
    otherwise ``None``.
    """

    def __init__(self, message: str, pivot_index: int | None = None):
        if pivot_index is not None:
            message = f"{message} (pivot index {pivot_index})"
        super().__init__(message)
        self.pivot_index = pivot_index
