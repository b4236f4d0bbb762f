"""camoval: batch evaluation and retrieval toolkit for camouflaged-image
synthesis."""

from .report import TOOLKIT_VERSION as __version__

__all__ = ["__version__"]
