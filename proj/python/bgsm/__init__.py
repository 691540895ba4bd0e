"""Bayesian group sparse multi-task regression."""

from bgsm._core import (
    __version__,
    credible_intervals,
    fit_gibbs,
    fit_wang,
    rank_snps,
    sample_inverse_gaussian,
    waic,
)

__all__ = [
    "__version__",
    "credible_intervals",
    "fit_gibbs",
    "fit_wang",
    "rank_snps",
    "sample_inverse_gaussian",
    "waic",
]
