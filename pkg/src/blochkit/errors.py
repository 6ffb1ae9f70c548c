"""Exception and warning types shared across the package.

Exit-code mapping used by the CLI: configuration problems derive from
:class:`ConfigError` (exit 2), runtime numerical failures derive from
:class:`NumericalError` (exit 3).
"""


class BlochkitError(Exception):
    """Base class for all package errors."""


class ConfigError(BlochkitError):
    """Base class for configuration and input-format errors."""


class ParseError(ConfigError):
    """Malformed configuration text. Carries line/column of the offence."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class ValidationError(ConfigError):
    """A parsed value violates an invariant. Carries the offending key."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class MissingColumn(ConfigError):
    """A CSV handed to the renderer lacks a required column."""


class NumericalError(BlochkitError):
    """Base class for runtime numerical failures."""


class SingularFrequency(NumericalError):
    """Permittivity evaluated at (or within cutoff of) one of its poles."""


class NoFiniteSingularity(NumericalError):
    """Pole location requested for a model that has none (beta = 0)."""


class DegenerateContrast(NumericalError):
    """Contrast magnitude below cutoff; dispersion formulas divide by it."""


class ComplexPermittivity(NumericalError):
    """Real-permittivity routine called on a complex-permittivity model."""


class DampedModel(NumericalError):
    """Undamped-only routine (pole cascade) called with gamma > 0."""


class NoPole(NumericalError):
    """Pole-neighbourhood routine called on a pole-free model (beta = 0)."""


class DomainError(NumericalError):
    """Argument outside the mathematical domain of the function."""


class DegenerateLattice(NumericalError):
    """Lattice generators are linearly dependent."""


class QuadratureTooCoarse(NumericalError):
    """Self-convergence check between quadrature orders failed."""


class EigenFailure(NumericalError):
    """Power iteration did not converge within its iteration cap."""


class PolePencilSingular(NumericalError):
    """Pole-pencil denominator within cutoff of zero (resonance indicator)."""


class NoConvergence(NumericalError):
    """Root polish failed to converge for a candidate."""


class SlowConvergence(UserWarning):
    """Lattice-sum tail estimate above tolerance at the truncation cap.

    Issued as a warning: the truncated value is still returned together
    with its tail estimate.
    """


class DilutenessWarning(UserWarning):
    """Particle diameters exceed half the minimal separation."""
