"""Special cycles on Picard modular surfaces: intersection series, level
groups and finite models of their Hida-theoretic interpolation."""

__version__ = "0.1.0"
