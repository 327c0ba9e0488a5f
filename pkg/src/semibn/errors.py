"""Exception and warning types shared across the package."""


class SemibnError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SemibnError):
    """Invalid or inconsistent run configuration."""


class DataFormatError(SemibnError):
    """Malformed input data (bad CSV cell, duplicate names, non-finite values)."""


class NodeMismatch(SemibnError):
    """Two structures being compared do not share node count or names."""


class CycleError(SemibnError):
    """A graph mutation would introduce a directed cycle."""


class SingularDesign(SemibnError):
    """Least-squares design matrix is rank deficient or has too few rows."""


class SingularCovariance(SemibnError):
    """Covariance matrix is not positive definite even after ridge repair."""


class SingularPrecision(SemibnError):
    """Sub-covariance for a partial correlation test is not invertible."""


class FoldFitFailure(SemibnError):
    """A per-fold fit failed during cross-validated scoring.

    Carries the fold index and the underlying cause so callers can either
    surface the failure or demote the candidate to a -inf score.
    """

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fit failed on fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause


class NoConsistentExtension(SemibnError):
    """A partially directed graph admits no acyclic consistent extension."""


class SchemaMismatch(SemibnError):
    """A serialized model document does not match the expected schema."""


class DegenerateVarianceWarning(UserWarning):
    """Residual variance underflowed the floor and was clamped."""
