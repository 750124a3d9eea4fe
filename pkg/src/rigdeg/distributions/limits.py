"""Limiting degree laws of the inhomogeneous and passive intersection graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from rigdeg.distributions.pmf import (
    DEFAULT_MAX_SUPPORT,
    DEFAULT_TAIL_TOL,
    DiscretePMF,
    compound_pmf,
    mixed_poisson_pmf,
    size_bias_shift,
    tau_pmf,
)
from rigdeg.distributions.spec import INFINITE, DistributionSpec
from rigdeg.errors import DomainError, ParameterError


@dataclass(frozen=True, eq=False)
class LimitModel:
    """Limit of the degree of a fixed vertex in the inhomogeneous graph.

    ``d* = tau_1 + ... + tau_L1`` where ``L1`` is mixed Poisson with rate
    ``Y * a1 * sqrt(beta)``, ``L2`` is mixed Poisson with rate ``X * b1 / sqrt(beta)``
    and ``tau`` is the size-biased shift of ``L2``.
    """

    beta: float
    a1: float
    b1: float
    p1: DistributionSpec
    p2: DistributionSpec
    lambda1_scale: float
    lambda2_scale: float
    pmf_lambda1: DiscretePMF
    pmf_lambda2: DiscretePMF
    pmf_tau: DiscretePMF
    pmf_dstar: DiscretePMF

    @property
    def lambda1_spec(self) -> tuple[DistributionSpec, float]:
        """Mixing law and scale of ``L1``: rate ``scale * Y``."""
        return self.p2, self.lambda1_scale

    @property
    def lambda2_spec(self) -> tuple[DistributionSpec, float]:
        return self.p1, self.lambda2_scale

    def tables(self) -> dict[str, DiscretePMF]:
        return {
            "pmf_lambda1": self.pmf_lambda1,
            "pmf_lambda2": self.pmf_lambda2,
            "pmf_tau": self.pmf_tau,
            "pmf_dstar": self.pmf_dstar,
        }


@dataclass(frozen=True, eq=False)
class PassiveLimitModel:
    """Limit of the degree of a fixed vertex in the passive graph: compound Poisson of ``Z~``."""

    beta: float
    mean_z: float
    pz: DistributionSpec
    pmf_z: DiscretePMF
    pmf_ztilde: DiscretePMF
    poisson_mean: float
    pmf_count: DiscretePMF
    pmf_dstar: DiscretePMF

    def tables(self) -> dict[str, DiscretePMF]:
        return {"pmf_z": self.pmf_z, "pmf_ztilde": self.pmf_ztilde, "pmf_dstar": self.pmf_dstar}


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not (beta > 0 and math.isfinite(beta)):
        raise ParameterError(f"beta must be a positive finite real, got {beta}")
    return beta


def limit_inhomogeneous(
    p1: DistributionSpec,
    p2: DistributionSpec,
    beta: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_support: int = DEFAULT_MAX_SUPPORT,
    min_support: int = 0,
) -> LimitModel:
    """Assemble the limit law for attribute weights ``X ~ p1`` and vertex weights ``Y ~ p2``.

    Only ``E X < inf`` and ``E Y < inf`` are required; ``E X**2`` may diverge.
    ``tail_tol`` bounds the tail mass of the final ``pmf_dstar``; it is shared
    out between the count table, the jump table and the convolution window.
    ``min_support`` forces the ``d*`` table to cover at least ``0 .. min_support-1``.
    """
    beta = _check_beta(beta)
    a1, b1 = p1.mean(), p2.mean()
    if a1 == INFINITE:
        raise DomainError(f"first-moment condition E X_1 < inf violated: attribute weight law {p1} has infinite mean")
    if b1 == INFINITE:
        raise DomainError(f"first-moment condition E Y_1 < inf violated: vertex weight law {p2} has infinite mean")
    s1 = a1 * math.sqrt(beta)
    s2 = b1 / math.sqrt(beta)
    if a1 == 0 or b1 == 0:
        # no attribute edges at all: every table collapses to a point mass at 0
        zero = DiscretePMF.delta(0)
        return LimitModel(beta, a1, b1, p1, p2, s1, s2, zero, zero, zero, zero)
    pmf_l1 = mixed_poisson_pmf(p2, s1, tail_tol / 3, max_support)
    mean_l1 = pmf_l1.mean
    jump_tol = tail_tol / (3 * max(1.0, mean_l1))
    pmf_l2 = mixed_poisson_pmf(p1, s2, jump_tol, max_support, tail_order=1)
    pmf_t = tau_pmf(pmf_l2)
    pmf_d = compound_pmf(pmf_l1, pmf_t, tail_tol, max_support, min_support=min_support)
    return LimitModel(beta, a1, b1, p1, p2, s1, s2, pmf_l1, pmf_l2, pmf_t, pmf_d)


def limit_passive(
    pz: DistributionSpec,
    beta: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_support: int = DEFAULT_MAX_SUPPORT,
    min_support: int = 0,
) -> PassiveLimitModel:
    """Compound Poisson limit ``sum_{j <= L} Z~_j`` with ``L ~ Poisson(E Z / beta)``.

    ``pz`` must be an integer-valued law with ``0 < E Z < inf``; no higher moment
    is needed.
    """
    beta = _check_beta(beta)
    if not pz.is_integer_valued:
        raise ParameterError(f"set-size law {pz} must be integer valued")
    mean_z = pz.mean()
    if not (0 < mean_z < INFINITE):
        raise DomainError(f"set-size condition 0 < E Z < inf violated: E Z = {mean_z} for {pz}")
    poisson_mean = mean_z / beta
    pmf_z = pz.integer_pmf(tail_tol / (3 * max(1.0, poisson_mean)), max_support, tail_order=1)
    pmf_zt = size_bias_shift(pmf_z)
    count = DiscretePMF.poisson(poisson_mean, tail_tol / 3)
    pmf_d = compound_pmf(count, pmf_zt, tail_tol, max_support, min_support=min_support)
    return PassiveLimitModel(beta, mean_z, pz, pmf_z, pmf_zt, poisson_mean, count, pmf_d)

