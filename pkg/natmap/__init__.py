"""Natural maps, natural volumes and degree experiments for cocycles on real hyperbolic space."""

__version__ = "1.0.0"
