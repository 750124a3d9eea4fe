"""Input laws, truncated PMFs and the limiting degree distributions."""

from rigdeg.distributions.limits import LimitModel, PassiveLimitModel, limit_inhomogeneous, limit_passive
from rigdeg.distributions.pmf import (
    DEFAULT_MAX_SUPPORT,
    DEFAULT_TAIL_TOL,
    DiscretePMF,
    compound_pmf,
    mixed_poisson_pmf,
    size_bias_shift,
    tau_pmf,
)
from rigdeg.distributions.spec import INFINITE, DistributionSpec, moment, parse_spec, sample

__all__ = [
    "DEFAULT_MAX_SUPPORT",
    "DEFAULT_TAIL_TOL",
    "INFINITE",
    "DiscretePMF",
    "DistributionSpec",
    "LimitModel",
    "PassiveLimitModel",
    "compound_pmf",
    "limit_inhomogeneous",
    "limit_passive",
    "mixed_poisson_pmf",
    "moment",
    "parse_spec",
    "sample",
    "size_bias_shift",
    "tau_pmf",
]
