"""Power, sample size and simulation for negative-binomial rate comparisons."""

__version__ = "0.1.0"
