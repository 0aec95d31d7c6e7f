"""Exception types shared across the library."""


class QuenchDuoError(Exception):
    """Base class for all library errors."""


class PoleError(QuenchDuoError):
    """Argument sits on a pole of the gamma/digamma function."""


class SeriesError(QuenchDuoError):
    """A series evaluation failed to converge to the requested accuracy."""


class BracketError(QuenchDuoError):
    """Root bracketing failed; indicates a special-function bug, not bad input."""


class DegenerateCouplingError(QuenchDuoError):
    """Closed form degenerates at (effectively) zero coupling."""


class DegenerateOverlapError(QuenchDuoError):
    """Closed-form overlap denominator is near-degenerate; use the quadrature path."""


class ConfigError(QuenchDuoError):
    """Invalid run configuration (bad key, type, or range)."""


class InvariantError(QuenchDuoError):
    """An internal consistency invariant was violated."""
