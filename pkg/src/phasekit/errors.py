"""Exception hierarchy shared by all solvers and the CLI."""


class PhasekitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PhasekitError):
    """Invalid configuration: unknown model, unknown parameter name, bad value."""


class ModelDomainError(PhasekitError):
    """A model evaluator returned a non-finite value."""


class StiffnessError(PhasekitError):
    """Step-size underflow in the explicit integrator (problem likely stiff).

    Only explicit adaptive Runge-Kutta is provided; stiff systems are out of
    scope and should be rescaled or treated with an external stiff solver.
    """


class DivergenceError(PhasekitError):
    """Integrated state left the finite domain."""


class NoCrossingError(PhasekitError):
    """The trajectory never crosses the requested section in the stated direction."""


class ConvergenceError(PhasekitError):
    """Newton iteration failed; the seed is likely outside the basin of convergence."""


class NonHyperbolicError(PhasekitError):
    """A nontrivial Floquet multiplier lies on or outside the unit circle.

    The solved orbit is still attached as ``.orbit`` (flagged non-hyperbolic)
    so callers may inspect it.
    """

    def __init__(self, message, orbit=None):
        super().__init__(message)
        self.orbit = orbit


class AccuracyError(PhasekitError):
    """A computed curve violates its accuracy contract (worst point reported)."""


class BasinEscapeError(PhasekitError):
    """Trajectory failed to converge to the periodic orbit."""


class DegenerateSectionError(PhasekitError):
    """The phase condition does not isolate a point on the orbit (singular system)."""


class NearTangencyError(PhasekitError):
    """|V'(chi*)| is below tolerance: locking-point sensitivity is unbounded."""


class AlignmentError(PhasekitError):
    """Curves defined on different phase grids cannot be combined."""


class DegenerateNormalizationError(PhasekitError):
    """A robustness column is identically zero and cannot be normalized."""


class UndefinedRelativeError(PhasekitError):
    """Relative sensitivity is undefined for a zero parameter value."""
