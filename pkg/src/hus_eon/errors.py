"""Exception types shared across the package."""


class HusEonError(Exception):
    """Base class for all domain errors."""


class OverlapError(HusEonError):
    """A spectrum window is already occupied on the targeted fiber."""


class WindowRangeError(HusEonError):
    """A spectrum window exceeds the fiber's slot range."""


class UnknownDemandError(HusEonError):
    """No live assignment exists for the given demand id."""


class InvalidBandwidthError(HusEonError):
    """Requested bandwidth is not a positive value."""


class MissingEntryError(HusEonError):
    """A lookup-table OSNR provider has no entry for the requested key."""


class EmptyRouteError(HusEonError):
    """An OSNR query was made for an empty route."""


class InvalidParamsError(HusEonError):
    """Physical-layer parameters are out of their valid domain."""


class StrategyModeError(HusEonError):
    """The fiber-selection strategy is not applicable to the traffic mode."""


class InstanceTooLargeError(HusEonError):
    """The optimization instance exceeds the guarded size limits."""
