"""Empirical degree laws and their distance to limiting laws."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from rigdeg.distributions.pmf import DiscretePMF
from rigdeg.errors import ConfigError, ParameterError
from rigdeg.models import DegreeBatch


@dataclass(frozen=True, eq=False)
class EmpiricalPMF:
    """Relative frequencies of ``N`` integer observations; no tail mass."""

    pmf: DiscretePMF
    N: int
    counts: np.ndarray

    def cdf(self, length: int) -> np.ndarray:
        """Exact empirical CDF on ``0 .. length-1`` from integer counts."""
        c = np.zeros(length, dtype=np.int64)
        lo, hi = self.pmf.offset, min(self.pmf.end, length)
        if hi > lo:
            c[lo:hi] = self.counts[: hi - lo]
        return np.cumsum(c) / self.N


def empirical_pmf(degrees) -> EmpiricalPMF:
    """Empirical law of a :class:`DegreeBatch` (or any array of nonnegative integers)."""
    d = degrees.degrees if isinstance(degrees, DegreeBatch) else np.asarray(degrees)
    d = np.asarray(d).ravel()
    if d.size == 0:
        raise ConfigError("cannot form an empirical law from an empty batch")
    if d.min() < 0 or not np.array_equal(d, np.round(d)):
        raise ParameterError("degrees must be nonnegative integers")
    d = d.astype(np.int64)
    lo = int(d.min())
    counts = np.bincount(d - lo)
    pmf = DiscretePMF(lo, counts / d.size, 0.0, mean=float(d.mean()))
    return EmpiricalPMF(pmf, int(d.size), counts)


def _as_pmf(p) -> DiscretePMF:
    return p.pmf if isinstance(p, EmpiricalPMF) else p


def tv_distance(p, q) -> float:
    """``1/2 sum |p - q|`` over the stored supports plus ``1/2`` of both tail masses, capped at 1."""
    p, q = _as_pmf(p), _as_pmf(q)
    length = max(p.end, q.end)
    body = 0.5 * math.fsum(np.abs(p.dense(length) - q.dense(length)))
    return min(1.0, body + 0.5 * (p.tail_mass + q.tail_mass))


def ks_curve(p, q) -> np.ndarray:
    """``|F_p(r) - F_q(r)|`` for ``r = 0 .. max end - 1`` (stored mass only)."""
    length = max(_as_pmf(p).end, _as_pmf(q).end)
    return np.abs(p.cdf(length) - q.cdf(length))


def ks_statistic(emp, limit) -> float:
    """``sup_r |F_emp(r) - F_limit(r)|``.

    Limit CDFs count stored mass only, so beyond the limit's table the
    difference is at most its tail mass; :func:`compare` inflates the band by
    exactly that amount.
    """
    return float(ks_curve(emp, limit).max())


def dkw_epsilon(N: int, alpha: float) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band at level ``alpha``."""
    if N < 1:
        raise ParameterError(f"N must be >= 1, got {N}")
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * N))


def two_sample_epsilon(n1: int, n2: int, alpha: float) -> float:
    """Band for ``sup |F_1 - F_2|``: a DKW band at ``alpha/2`` around each sample, added."""
    return dkw_epsilon(n1, alpha / 2) + dkw_epsilon(n2, alpha / 2)


@dataclass
class ComparisonReport:
    tv: float
    ks: float
    dkw_epsilon: float
    alpha: float
    verdict: str
    tail_mass: float = 0.0
    ks_argmax: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def compare(emp: EmpiricalPMF, limit: DiscretePMF, alpha: float = 0.01, metadata: dict | None = None) -> ComparisonReport:
    """KS test of the empirical law against a limit table.

    The verdict is ``pass`` iff ``ks <= dkw_epsilon(N, alpha) + limit.tail_mass``;
    TV is descriptive only.
    """
    curve = ks_curve(emp, limit)
    ks = float(curve.max())
    eps = dkw_epsilon(emp.N, alpha)
    verdict = "pass" if ks <= eps + limit.tail_mass else "fail"
    meta = {"N": emp.N}
    meta.update(metadata or {})
    return ComparisonReport(
        tv=tv_distance(emp, limit), ks=ks, dkw_epsilon=eps, alpha=alpha, verdict=verdict,
        tail_mass=float(limit.tail_mass), ks_argmax=int(curve.argmax()), metadata=meta,
    )


def compare_two_sample(a: EmpiricalPMF, b: EmpiricalPMF, alpha: float = 0.001) -> ComparisonReport:
    """Two-sample KS with the summed DKW band."""
    curve = ks_curve(a, b)
    ks = float(curve.max())
    eps = two_sample_epsilon(a.N, b.N, alpha)
    return ComparisonReport(
        tv=tv_distance(a, b), ks=ks, dkw_epsilon=eps, alpha=alpha,
        verdict="pass" if ks <= eps else "fail", ks_argmax=int(curve.argmax()),
        metadata={"N1": a.N, "N2": b.N},
    )


def write_plot_data(path: str | Path, emp: EmpiricalPMF, limit: DiscretePMF) -> Path:
    """``r,empirical,limit`` rows over the union of both supports."""
    length = max(emp.pmf.end, limit.end)
    e, q = emp.pmf.dense(length), limit.dense(length)
    path = Path(path)
    with path.open("w") as fh:
        fh.write("r,empirical,limit\n")
        for r in range(length):
            fh.write(f"{r},{float(e[r])!r},{float(q[r])!r}\n")
    return path
