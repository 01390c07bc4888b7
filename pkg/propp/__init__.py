"""propp: propensity-weighted modified power priors for single-arm trials."""

__version__ = "0.1.0"
