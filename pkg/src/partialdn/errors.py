"""Exception types shared across the package."""


class PartialDnError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(PartialDnError):
    """Invalid experiment configuration (bad value, unknown key, bad range)."""


class GeometryError(PartialDnError):
    """Boundary-geometry request that is empty or inconsistent (e.g. no face
    is illuminated strongly enough for the requested margin)."""


class SupportError(PartialDnError):
    """A boundary trace does not vanish where the operator requires it to."""


class SingularOperatorError(PartialDnError):
    """The Schrodinger operator has (numerically) a kernel: smallest
    |eigenvalue| estimate at or below the configured gap tolerance."""

    def __init__(self, estimate, gap_tol):
        self.estimate = estimate
        self.gap_tol = gap_tol
        super().__init__(
            f"operator numerically singular: min |eigenvalue| estimate "
            f"{estimate:.3e} <= gap tolerance {gap_tol:.3e}"
        )


class SolverDivergenceError(PartialDnError):
    """A Krylov solve failed to reach the requested residual."""

    def __init__(self, message, residual_history=None):
        self.residual_history = list(residual_history or [])
        super().__init__(message)


class ConeViolationError(PartialDnError):
    """A frequency vector lies outside the admissible cone: the projected
    direction is not epsilon-close to the probe axis."""

    def __init__(self, kappa, distance, eps):
        self.kappa = kappa
        self.distance = distance
        self.eps = eps
        super().__init__(
            f"frequency {tuple(kappa)} violates the cone condition: "
            f"|zeta - xi| = {distance:.6f} >= eps = {eps:.6f}"
        )


class OutOfRegimeError(PartialDnError):
    """A parameter-selection precondition fails; carries the violated
    inequality so callers can fall back explicitly."""

    def __init__(self, inequality, **values):
        self.inequality = inequality
        self.values = values
        detail = ", ".join(f"{k}={v:.6e}" for k, v in values.items())
        super().__init__(f"out of regime: {inequality} ({detail})")
