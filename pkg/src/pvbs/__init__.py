"""Two-species PVBS spin models on finite lattice volumes: exact
diagonalization, spectral gaps, and martingale-method gap certificates."""

__version__ = "0.1.0"

from .model import GapClass, Params, classify_zd  # noqa: F401
