"""Transaction-network, technical and social features for trend classification."""

__version__ = "0.1.0"
