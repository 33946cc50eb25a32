"""Exception types shared across the engine."""


class HapticMapError(Exception):
    """Base class for all engine errors."""


class GeocodeFailure(HapticMapError):
    """Place text could not be resolved to coordinates."""


class NetworkFailure(HapticMapError):
    """An upstream HTTP service was unreachable."""


class OverpassRateLimited(NetworkFailure):
    """Overpass rejected the query due to load; retried with backoff first."""


class MalformedResponse(HapticMapError):
    """Upstream response could not be parsed."""


class DegenerateGeometry(HapticMapError):
    """Ring with fewer than 3 distinct vertices, or vanishing area."""


class DegenerateBearing(HapticMapError):
    """Bearing requested between two identical points."""


class EmptyDataset(HapticMapError):
    """Operation requires at least one zone."""


class SessionClosed(HapticMapError):
    """Operation on a closed exploration session."""


class EmptyQuestion(HapticMapError):
    """Ask invoked with an empty question."""


class AskInFlight(HapticMapError):
    """A second ask was issued while one is pending on the same session."""


class ProviderError(HapticMapError):
    """Base class for conversational-provider failures."""


class ProviderTimeout(ProviderError):
    """Provider did not answer within the configured timeout."""


class ProviderRejected(ProviderError):
    """Provider answered with a non-success status."""


class EncodingFailure(HapticMapError):
    """Image could not be encoded."""
