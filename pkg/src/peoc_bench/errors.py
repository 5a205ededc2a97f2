"""Error types shared across the package.

Each failure mode the public operations promise to signal gets its own
class so callers (and the CLI exit-code mapping) can tell validation
problems from data problems.
"""


class PeocBenchError(Exception):
    """Base class for every error raised by this package."""


class UnsatisfiableSeed(PeocBenchError):
    """Level generation exhausted its retry budget (indicates a generator bug)."""


class SteppedTerminalState(PeocBenchError):
    """step() was called on a state whose episode already ended."""


class ShapeMismatch(PeocBenchError):
    """An array argument has the wrong length or shape."""


class EmptyTrajectory(PeocBenchError):
    """An operation that needs at least one transition got none."""


class NonFiniteLoss(PeocBenchError):
    """A training loss or gradient went NaN/inf; the repeat must be abandoned."""


class EmptyInput(PeocBenchError):
    """A nonempty collection was required."""


class EmptyTrainSet(EmptyInput):
    """Classifier fitting requires at least one training observation."""


class TooFewPoints(PeocBenchError):
    """k-NN index needs at least k stored points."""


class SingleClassInput(PeocBenchError):
    """ROC analysis needs at least one sample of each class."""


class ConfigError(PeocBenchError):
    """Base class for configuration file problems."""


class ParseError(ConfigError):
    """Malformed config or CSV input; message carries the line number."""


class UnknownKey(ConfigError):
    """Config file contains a key the schema does not define."""


class RangeError(ConfigError):
    """Config value is outside its legal range."""


class NoAcceptedRepeats(PeocBenchError):
    """Every process-repeat was discarded by the performance gate.

    Carries the partial report so callers can still persist diagnostics.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
