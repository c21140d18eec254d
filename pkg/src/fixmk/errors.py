"""Exception types shared across the library."""


class FixmkError(Exception):
    """Base class for all fixmk errors."""


class DimensionMismatchError(FixmkError, ValueError):
    """Operands live in different ambient dimensions."""


class InvalidWeightsError(FixmkError, ValueError):
    """Convex-combination weights are negative or do not sum to one."""


class DegenerateBasisError(FixmkError, ValueError):
    """A subspace basis is linearly dependent."""


class ZeroFunctionalError(FixmkError, ValueError):
    """The functional vanishes on the subspace; nothing to normalize."""


class NonlinearOperatorError(FixmkError, ValueError):
    """An operation requiring a purely linear map got a nonzero offset."""


class EnumerationCapError(FixmkError):
    """Word enumeration exceeded the configured element cap."""

    def __init__(self, cap: int):
        super().__init__(f"enumeration exceeded the element cap of {cap}")
        self.cap = cap


class StructureValidationError(FixmkError):
    """A pipeline step required a validated structure tree and got a bad one."""

    def __init__(self, report):
        kinds = sorted({f.kind for f in report.failures})
        super().__init__(f"structure validation failed: {', '.join(kinds)}")
        self.report = report


class NotConvergedError(FixmkError):
    """Averaging hit the depth budget before reaching the residual target."""

    def __init__(self, point, residuals, certificate):
        best = max(residuals.values()) if residuals else float("nan")
        super().__init__(
            f"best residual {best:.3e} after depth {certificate.n_final}; "
            "raise n_max or loosen tol"
        )
        self.point = point
        self.residuals = residuals
        self.certificate = certificate


class EmptyFixedSetError(FixmkError):
    """No common fixed point exists inside the polytope.

    For validated self-maps of a compact convex polytope this cannot happen;
    seeing it means the structure or invariance checks were skipped or too
    loose, or the tolerance is tighter than the arithmetic supports.
    """

    def __init__(self, reason: str, detail: str):
        super().__init__(f"{reason}: {detail}")
        self.reason = reason


class EmptyConstraintSetError(FixmkError):
    """The norm-ball/affine-slice constraint set came out empty."""


class ExtensionInvariantError(FixmkError):
    """An extension-problem precondition does not hold."""

    def __init__(self, invariant: str, detail: str):
        super().__init__(f"{invariant}: {detail}")
        self.invariant = invariant


class SchemaError(FixmkError, ValueError):
    """A problem file does not match the documented JSON schema."""
