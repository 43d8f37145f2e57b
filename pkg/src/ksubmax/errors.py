"""Exception types shared across the package.

Kept in one module so the service layer can map them to HTTP error
codes uniformly.
"""


class KsubmaxError(Exception):
    """Base class for all library errors."""


class ElementAlreadyAssigned(KsubmaxError):
    pass


class PositionOutOfRange(KsubmaxError):
    pass


class MismatchedK(KsubmaxError):
    pass


class UnknownElement(KsubmaxError):
    pass


class EmptyUniverse(KsubmaxError):
    """Every element was discarded (or the universe was empty to begin with)."""


class PairwiseViolation(KsubmaxError):
    """A bonus table breaks the w[e,i] + w[e,j] >= 0 requirement."""

    def __init__(self, element, i, j, wi, wj):
        self.element = element
        self.i = i
        self.j = j
        super().__init__(
            f"bonus weights for element {element!r} violate pairwise "
            f"nonnegativity: w[{i}]={wi} + w[{j}]={wj} < 0"
        )


class EpsilonOutOfRange(KsubmaxError):
    pass


class InstanceTooLarge(KsubmaxError):
    pass


class TraceMismatch(KsubmaxError):
    """Recomputed run-trace values diverge from the recorded ones."""


class UnknownNode(KsubmaxError):
    pass


class SingularCovariance(KsubmaxError):
    pass


class MalformedLine(KsubmaxError):
    def __init__(self, lineno, text, reason=""):
        self.lineno = lineno
        self.text = text
        suffix = f" ({reason})" if reason else ""
        super().__init__(f"line {lineno}: cannot parse {text!r}{suffix}")


class WeightOutOfRange(KsubmaxError):
    pass


class NoUsableRows(KsubmaxError):
    pass


class ConfigError(KsubmaxError):
    """Invalid experiment or CLI configuration."""
