"""heislab: spherical means, sparse domination and weights on the Heisenberg
group, verified numerically at desk scale."""

from . import corpus, dyadic, heis, laguerre, means, regions, sparse, spectral, weights  # noqa: F401

__version__ = "0.1.0"
