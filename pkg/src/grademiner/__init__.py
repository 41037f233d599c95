"""Student performance banding with k-means clustering and ID3 decision trees."""

__version__ = "0.1.0"

from .errors import GrademinerError  # noqa: E402,F401

__all__ = ["GrademinerError", "__version__"]
