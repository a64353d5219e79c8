"""Exception types raised across the package.

Model errors (islanding, singular systems) are kept separate from data and
validation errors because the command line maps them to different exit codes.
"""


class SentinelError(Exception):
    """Base class for every error raised by this package."""


class DuplicateIdError(SentinelError, ValueError):
    """A bus or branch id appears more than once."""


class NonpositiveReactanceError(SentinelError, ValueError):
    """A branch reactance is zero, negative, or not a number."""


class InvalidCoordinateError(SentinelError, ValueError):
    """A latitude/longitude pair is outside [-90, 90] x [-180, 180]."""


class UnknownBusError(SentinelError, LookupError):
    """A referenced bus id does not exist in the network."""


class UnknownBranchError(SentinelError, LookupError):
    """A referenced branch id does not exist or is out of service."""


class UnknownSlackError(SentinelError, ValueError):
    """The designated slack bus does not exist in the network."""


class UnbalancedInjectionsError(SentinelError, ValueError):
    """Bus injections sum to more than the rebalancing tolerance."""


class DisconnectedGraphError(SentinelError):
    """The in-service network does not form a single connected component."""


class IslandingOutageError(SentinelError):
    """The requested outage would split the network into islands."""


class SingularSystemError(SentinelError):
    """The reduced susceptance matrix could not be factorized."""


class NoMonitoredBranchError(SentinelError, ValueError):
    """A scenario was requested on a network with no monitored branch."""


class EvenWindowError(SentinelError, ValueError):
    """A moving filter window is even or smaller than one sample."""


class LengthMismatchError(SentinelError, ValueError):
    """Two series that must be the same length are not."""


class WindowOutOfRangeError(SentinelError, ValueError):
    """A pre/post analysis window falls outside the recorded samples."""


class EmptyDatasetError(SentinelError, ValueError):
    """A dataset with no channels or no samples was supplied."""


class DatasetSchemaError(SentinelError, ValueError):
    """A dataset or config file does not match the expected schema."""
