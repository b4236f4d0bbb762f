"""Exception types shared across the toolkit."""


class CamovalError(Exception):
    """Base class for all toolkit errors."""


class DecodeError(CamovalError):
    """An image file could not be read or decoded."""


class EmptyImage(CamovalError):
    """A raster with zero area."""


class DimensionMismatch(CamovalError):
    """Two rasters or feature sets that must share dimensions do not."""


# featstats historically calls this DimMismatch; same condition.
DimMismatch = DimensionMismatch


class ParseError(CamovalError):
    """A manifest or report file is malformed."""


class EmptyRegion(CamovalError):
    """A mask selects no pixels for the requested region."""


class EmptyMask(CamovalError):
    """A mask with zero foreground pixels where foreground is required."""


class EmptyList(CamovalError):
    """An aggregate was requested over zero items."""


class TooSmall(CamovalError):
    """An image is smaller than the metric's window."""


class TooFewSamples(CamovalError):
    """A feature set with fewer samples than the statistic needs."""


class NotSymmetric(CamovalError):
    """A matrix expected to be symmetric is not, within tolerance."""


class BlockTooLarge(CamovalError):
    """Requested block size exceeds the available sample count."""


class ZeroVector(CamovalError):
    """Cosine similarity requested on a zero-norm vector."""


class KOutOfRange(CamovalError):
    """Requested top-k outside [1, K]."""


class ShapeMismatch(CamovalError):
    """Token grids that must share a shape do not."""


class EmptyRetrievalList(CamovalError):
    """Fusion requested with zero retrieved grids."""


class EmptyGroundTruth(CamovalError):
    """A ground-truth mask with no foreground where the metric requires one."""


class MissingPrediction(CamovalError):
    """One or more manifest ids have no prediction file."""
