"""Exception types raised by the geometric operations."""


class CoisoError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(CoisoError):
    """Singular values straddle the rank cutoff; input too ill-conditioned."""


class ClassificationError(CoisoError):
    """A subspace failed the coisotropy test.

    ``witness`` carries ``(vector, residual, angle)``: a kernel vector of the
    symplectic complement, its component outside the candidate subspace and
    the offending principal angle.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ContinuityLossError(CoisoError):
    """A hint column projected below the norm floor; caller must refine."""


class DiscontinuousLoopError(CoisoError):
    """Refinement budget exhausted without meeting the continuity contract."""


class AliasingError(CoisoError):
    """A consecutive phase jump reached pi/2; samples are too coarse."""


class ClosureError(CoisoError):
    """A winding failed to round to an integer within the residual bound."""


class FrameDegeneracyError(CoisoError):
    """The transverse contraction lost numerical rank."""


class InternalConsistencyError(CoisoError):
    """Two routes that must agree by construction disagreed."""


class UnnormalizedDefiningFunctionError(CoisoError):
    """|grad rho| deviates from 1 beyond tolerance in strict mode."""


class OffSurfaceError(CoisoError):
    """A point that must lie on the hypersurface does not."""


class ExtensionQualityError(CoisoError):
    """A Lie bracket of surface extensions left the tangent space."""


class NumericalQualityError(CoisoError):
    """A symmetry that holds analytically was violated beyond tolerance."""
