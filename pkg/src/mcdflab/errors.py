"""Exception types shared across the package."""


class McdfError(Exception):
    """Base class for package errors."""


class ConfigError(McdfError):
    """Invalid problem or solver configuration (maps to CLI exit code 2)."""


class ConstraintInfeasibleError(ConfigError):
    """Requested occupation floor cannot be met by any CI vector at this (K, N)."""


class DegenerateGramError(McdfError):
    """Orbital Gram matrix is numerically singular; orthonormalization impossible."""

    def __init__(self, smallest: float):
        self.smallest = smallest
        super().__init__(f"Gram matrix is numerically singular (smallest eigenvalue {smallest:.3e})")


class NonOrthonormalError(McdfError):
    """Operation requires an orthonormal orbital set and got one that is not."""


class SubcriticalLightSpeedError(McdfError):
    """Inner maximization detected positive curvature: c is below the concavity threshold."""

    def __init__(self, curvature: float):
        self.curvature = curvature
        super().__init__(
            f"inner objective is not concave (probed curvature {curvature:.3e} > 0); "
            "light speed appears subcritical for this problem"
        )


class SolverFailure(McdfError):
    """Solve did not produce a usable state (maps to CLI exit code 3)."""
