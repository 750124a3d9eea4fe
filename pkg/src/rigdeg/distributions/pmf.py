"""Truncated probability mass functions and the operations on them.

Everything here works on :class:`DiscretePMF`, a dense table of probabilities on
``{offset, offset + 1, ...}`` plus an explicit ``tail_mass`` for whatever lies
beyond the stored support.  Mass is never dropped silently: every constructor
extends its support until the neglected tail is at most ``tail_tol`` or raises
:class:`~rigdeg.errors.TruncationError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special, stats

from rigdeg.distributions.spec import INFINITE, DistributionSpec, _smallest_index
from rigdeg.errors import DomainError, ParameterError, TruncationError

DEFAULT_TAIL_TOL = 1e-9
DEFAULT_MAX_SUPPORT = 1 << 15
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscretePMF:
    """Probabilities ``probs[i] = P(X = offset + i)`` and the unaccounted ``tail_mass``.

    ``mean`` is the exact mean of the full (untruncated) law when it is known
    analytically, ``math.inf`` when it diverges and ``None`` when unknown.
    ``tail_tol`` is the tolerance the table was built to, if any.
    """

    offset: int
    probs: np.ndarray
    tail_mass: float = 0.0
    mean: float | None = None
    tail_tol: float | None = None

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1:
            raise ParameterError("probs must be one-dimensional")
        if self.offset < 0 or int(self.offset) != self.offset:
            raise ParameterError(f"offset must be a nonnegative integer, got {self.offset}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ParameterError("probabilities must be finite and nonnegative")
        tail = float(self.tail_mass)
        if tail < 0:
            raise ParameterError(f"tail_mass must be nonnegative, got {tail}")
        total = math.fsum(probs) + tail
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ParameterError(f"stored mass plus tail is {total!r}, not 1 within {NORMALIZATION_TOL}")
        if self.tail_tol is not None and tail > self.tail_tol * (1 + 1e-12) + 1e-300:
            raise ParameterError(f"tail_mass {tail:.3g} exceeds requested tail_tol {self.tail_tol:.3g}")
        probs.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", tail)

    # ---- constructors ---------------------------------------------------

    @classmethod
    def delta(cls, k: int) -> DiscretePMF:
        return cls(int(k), np.array([1.0]), 0.0, mean=float(k), tail_tol=0.0)

    @classmethod
    def from_dense(cls, probs, tail_mass: float | None = None, mean=None, tail_tol=None) -> DiscretePMF:
        """Build from probabilities indexed from 0; leading zeros move into ``offset``.

        When ``tail_mass`` is omitted it is taken as ``1 - sum(probs)``.
        """
        probs = np.asarray(probs, dtype=float)
        nz = np.flatnonzero(probs)
        if len(nz) == 0:
            raise ParameterError("a PMF needs at least one positive entry")
        lead, last = int(nz[0]), int(nz[-1])
        body = probs[lead : last + 1]
        if tail_mass is None:
            tail_mass = max(0.0, 1.0 - math.fsum(body))
        return cls(lead, body, tail_mass, mean=mean, tail_tol=tail_tol)

    @classmethod
    def poisson(cls, lam: float, tail_tol: float = DEFAULT_TAIL_TOL, max_support: int = DEFAULT_MAX_SUPPORT):
        if lam == 0:
            return cls.delta(0)
        return DistributionSpec.poisson(lam).integer_pmf(tail_tol, max_support)

    # ---- queries ---------------------------------------------------------

    @property
    def end(self) -> int:
        """One past the largest stored value."""
        return self.offset + len(self.probs)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.end)

    @property
    def stored_mass(self) -> float:
        return math.fsum(self.probs)

    def stored_mean(self) -> float:
        return math.fsum(self.support * self.probs)

    def mean_value(self) -> float:
        """Exact mean if recorded, else the mean of the stored entries."""
        return self.stored_mean() if self.mean is None else self.mean

    def __call__(self, r: int) -> float:
        i = int(r) - self.offset
        return float(self.probs[i]) if 0 <= i < len(self.probs) else 0.0

    def dense(self, length: int | None = None) -> np.ndarray:
        """Probabilities indexed from 0, zero-padded or cut to ``length``."""
        length = self.end if length is None else int(length)
        out = np.zeros(length)
        hi = min(self.end, length)
        if hi > self.offset:
            out[self.offset : hi] = self.probs[: hi - self.offset]
        return out

    def cdf(self, length: int | None = None) -> np.ndarray:
        """``F(r)`` for ``r = 0 .. length-1`` counting stored mass only."""
        length = self.end if length is None else int(length)
        return np.cumsum(self.dense(length))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the stored entries renormalized (tail ignored)."""
        cdf = np.cumsum(self.probs)
        u = rng.random(size) * cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        return self.offset + idx

    def __repr__(self) -> str:
        head = ", ".join(f"{p:.6g}" for p in self.probs[:6])
        more = ", ..." if len(self.probs) > 6 else ""
        return f"DiscretePMF(offset={self.offset}, probs=[{head}{more}] ({len(self.probs)}), tail_mass={self.tail_mass:.3g})"


# ---- size bias -------------------------------------------------------------


def size_bias_shift(q: DiscretePMF) -> DiscretePMF:
    """``Q~(j) = (j + 1) Q(j + 1) / mu_Q`` for ``j >= 0``.

    The mean used is ``q.mean`` when recorded; otherwise the stored mean, which
    is only accepted when ``q`` carries no tail (the mean is undetermined
    otherwise).  The returned tail is exactly the size-biased mass of the part of
    ``q`` that was not stored.
    """
    if q.mean is not None:
        mu = q.mean
    elif q.tail_mass == 0.0:
        mu = q.stored_mean()
    else:
        raise DomainError("mean of a truncated PMF is undetermined; record its exact mean")
    if not (0 < mu < INFINITE):
        raise DomainError(f"size biasing needs a finite positive mean, got {mu}")
    k = q.support
    weighted = k * q.probs / mu
    if q.offset == 0:
        weighted = weighted[1:]
        offset = 0
    else:
        offset = q.offset - 1
    if len(weighted) == 0 or not np.any(weighted > 0):
        raise DomainError("size biasing needs positive mass on values >= 1")
    tail = max(0.0, 1.0 - math.fsum(weighted))
    tol = None if q.tail_tol is None else max(q.tail_tol, tail)
    mean = None
    if q.tail_mass == 0.0:
        mean = math.fsum((k * (k - 1.0)) * q.probs) / mu
    return DiscretePMF(offset, weighted, tail, mean=mean, tail_tol=tol)


def tau_pmf(pmf_lambda2: DiscretePMF) -> DiscretePMF:
    """Jump law ``P(tau = r) = (r + 1) P(L2 = r + 1) / E L2`` of the inhomogeneous limit."""
    if pmf_lambda2.mean_value() == 0:
        raise DomainError("E Lambda_2 = 0: the jump law is undefined")
    return size_bias_shift(pmf_lambda2)


# ---- compound sums ---------------------------------------------------------


def compound_pmf(
    count: DiscretePMF,
    jump: DiscretePMF,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_support: int = DEFAULT_MAX_SUPPORT,
    min_support: int = 0,
) -> DiscretePMF:
    """Law of ``sum_{j=1}^{N} J_j`` with ``N ~ count`` and i.i.d. ``J_j ~ jump``.

    Computed as ``sum_k P(N=k) jump^{*k}`` by Horner's scheme with direct
    (non-transform) convolutions restricted to a window ``[0, S)``.  ``S``
    doubles until the neglected mass is at most ``tail_tol``.  The returned
    ``tail_mass`` covers the count tail, the jump tail and the window cut.
    The window never starts below ``min_support`` (capped at ``max_support``).
    """
    if jump.offset == 0 and jump.end == 1 and jump.tail_mass == 0:
        # every jump is exactly zero, whatever the count
        return DiscretePMF.delta(0)
    c = count.dense()
    if count.end == 1 or (count.offset == 0 and not np.any(c[1:] > 0)):
        return DiscretePMF(0, np.array([c[0]]), count.tail_mass, mean=0.0 if count.tail_mass == 0 else None,
                           tail_tol=max(tail_tol, count.tail_mass))
    f = jump.dense()
    tj = jump.tail_mass
    ks = np.arange(len(c))
    irreducible = 1.0 - math.fsum(c * (1.0 - tj) ** ks)
    if irreducible > tail_tol:
        raise TruncationError(
            f"count/jump tails already lose {irreducible:.3g} > tail_tol {tail_tol:.3g}",
            achieved=irreducible,
        )
    if jump.offset == 0 and jump.end == 1:
        # all jumps are zero
        return DiscretePMF(0, np.array([math.fsum(c)]), count.tail_mass, mean=0.0, tail_tol=tail_tol)

    mean_guess = math.fsum(c * ks) * jump.stored_mean()
    S = max(64, len(f), 1 << int(math.ceil(math.log2(4 * mean_guess + 64))))
    S = min(max(S, min_support), max_support)
    while True:
        out = _horner(c, f, S)
        tail = max(0.0, 1.0 - math.fsum(out))
        if tail <= tail_tol or S >= max_support:
            break
        S = min(2 * S, max_support)
    if tail > tail_tol:
        raise TruncationError(
            f"compound tail {tail:.3g} > tail_tol {tail_tol:.3g} at max_support {max_support}",
            achieved=tail,
        )
    mean = None
    if count.mean is not None and jump.mean is not None:
        mean = count.mean * jump.mean if count.mean > 0 and jump.mean > 0 else 0.0
    return _trimmed(out, tail, mean, tail_tol)


def _horner(c: np.ndarray, f: np.ndarray, S: int) -> np.ndarray:
    f = f[:S]
    K = len(c) - 1
    if f[0] == 0:
        # jumps are >= 1, so terms with k >= S fall outside the window
        K = min(K, S - 1)
    acc = np.array([c[K]])
    for k in range(K - 1, -1, -1):
        acc = np.convolve(f, acc)[:S]
        acc[0] += c[k]
    return acc


def _trimmed(dense: np.ndarray, tail: float, mean, tail_tol) -> DiscretePMF:
    nz = np.flatnonzero(dense > 0)
    lead, last = int(nz[0]), int(nz[-1])
    return DiscretePMF(lead, dense[lead : last + 1], tail, mean=mean, tail_tol=tail_tol)


# ---- mixed Poisson -----------------------------------------------------------

# Poisson(lam) puts < 1e-30 on r outside lam -/+ (15 sqrt(lam) + 50)
_WINDOW_SIGMAS = 15.0
_WINDOW_PAD = 50.0
_BLOCK = 128


def _lam_floor(r: float) -> float:
    """Smallest rate whose Poisson law has non-negligible mass at or above ``r``."""
    return max(0.0, r - _WINDOW_SIGMAS * math.sqrt(r + 1) - _WINDOW_PAD)


def _lam_ceiling(r: float) -> float:
    """Rate above which a Poisson law has negligible mass at or below ``r``."""
    return r + _WINDOW_SIGMAS * math.sqrt(r + 1) + _WINDOW_PAD


def _poisson_tail_weight(R: int, lam, order: int):
    """``P(N > R)`` (order 0) or ``lam P(N >= R)`` (order 1) for ``N ~ Poisson(lam)``."""
    a = R + 1 - order
    if order == 0:
        return special.gammainc(a, lam)
    if a == 0:
        return lam
    return lam * special.gammainc(a, lam)


def mixed_poisson_pmf(
    mixing: DistributionSpec,
    scale: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_support: int = DEFAULT_MAX_SUPPORT,
    tail_order: int = 0,
) -> DiscretePMF:
    """``P(L = r) = E[exp(-s X) (s X)**r / r!]`` for ``X ~ mixing`` and ``s = scale``.

    Discrete mixing laws are summed exactly over their atoms.  Continuous laws
    are integrated with adaptive vector quadrature, block by block in ``r``,
    each block over the range of ``x`` where the Poisson kernel is non-negligible.
    ``tail_order=1`` sizes the support by the size-biased tail
    ``E[L; L > R] / E L`` instead of ``P(L > R)``.
    """
    if scale < 0 or not math.isfinite(scale):
        raise ParameterError(f"scale must be finite and >= 0, got {scale}")
    lo, hi = mixing.support()
    if scale == 0 or hi == 0:
        return DiscretePMF.delta(0)
    if lo == hi and not mixing.is_discrete:
        mixing = DistributionSpec.constant(lo)
    mean_mix = mixing.mean()
    if not math.isfinite(mean_mix):
        raise DomainError(f"mixing law {mixing} has infinite mean; the mixed Poisson law has no computable table")
    s = float(scale)
    mu = s * mean_mix
    if mixing.is_discrete:
        engine = _DiscreteMixing(mixing, s, max_support)
    else:
        engine = _ContinuousMixing(mixing, s, tail_tol)

    if tail_order == 0:
        tail = engine.mass_tail
    elif tail_order == 1:
        tail = lambda R: engine.biased_tail(R) / mu  # noqa: E731
    else:
        raise ParameterError("tail_order must be 0 or 1")
    R = _smallest_index(tail, 0, max_support - 1, tail_tol)
    if R is None:
        achieved = tail(max_support - 1)
        raise TruncationError(
            f"mixed Poisson({mixing}, scale={s:g}) tail {achieved:.3g} > tail_tol {tail_tol:.3g} "
            f"at max_support {max_support}",
            achieved=achieved,
        )
    probs = engine.entries(R)
    mass_tail = min(1.0, max(0.0, float(engine.mass_tail(R))))
    return DiscretePMF(0, probs, mass_tail, mean=mu, tail_tol=max(tail_tol, mass_tail) if tail_order else tail_tol)


class _DiscreteMixing:
    def __init__(self, mixing: DistributionSpec, s: float, max_support: int):
        self.mixing = mixing
        self.s = s
        vmax = _lam_ceiling(max_support) / s
        vals, w, dropped = mixing.atoms(vmax)
        keep = w > 0
        self.vals, self.w = vals[keep], w[keep]
        self.dropped = dropped
        self.dropped_mean = mixing.tail_mean(vmax) if dropped > 0 else 0.0
        self.lam = s * self.vals

    def mass_tail(self, R: int) -> float:
        return math.fsum(self.w * _poisson_tail_weight(R, self.lam, 0)) + self.dropped

    def biased_tail(self, R: int) -> float:
        return math.fsum(self.w * _poisson_tail_weight(R, self.lam, 1)) + self.s * self.dropped_mean

    def entries(self, R: int) -> np.ndarray:
        r = np.arange(R + 1, dtype=float)
        out = np.zeros(R + 1)
        lgam = special.gammaln(r + 1)
        for lam, w in zip(self.lam, self.w):
            a = int(max(0.0, math.floor(_lam_floor_inverse(lam))))
            b = min(R, int(math.ceil(_lam_ceiling(lam))))
            if a > b:
                continue
            rr = r[a : b + 1]
            out[a : b + 1] += w * np.exp(special.xlogy(rr, lam) - lam - lgam[a : b + 1])
        return out


def _lam_floor_inverse(lam: float) -> float:
    """Smallest ``r`` at which Poisson(lam) has non-negligible mass."""
    return lam - _WINDOW_SIGMAS * math.sqrt(lam + 1) - _WINDOW_PAD


class _ContinuousMixing:
    def __init__(self, mixing: DistributionSpec, s: float, tail_tol: float):
        self.mixing = mixing
        self.s = s
        self.lo, self.hi = mixing.support()
        self.mean = mixing.mean()
        self.qtol = min(tail_tol / 10, 1e-11)

    def _upper(self, R: int) -> float:
        return min(self.hi, max(self.lo, _lam_ceiling(R) / self.s))

    def _integrate(self, fun, a: float, b: float, brk: float) -> float:
        if b <= a:
            return 0.0
        pts = [p for p in (brk,) if a < p < b]
        val, _ = integrate.quad(fun, a, b, points=pts or None, epsabs=self.qtol, epsrel=1e-10, limit=500)
        return val

    def mass_tail(self, R: int) -> float:
        c = self._upper(R)
        logpdf, s = self.mixing.logpdf, self.s

        def fun(x):
            return math.exp(logpdf(x)) * special.gammainc(R + 1, s * x)

        head = self._integrate(fun, self.lo, c, R / s)
        return head + (self.mixing.sf(c) if c < self.hi else 0.0)

    def biased_tail(self, R: int) -> float:
        c = self._upper(R)
        logpdf, s = self.mixing.logpdf, self.s

        def fun(x):
            lam = s * x
            return math.exp(logpdf(x)) * float(_poisson_tail_weight(R, lam, 1))

        head = self._integrate(fun, self.lo, c, R / s)
        return head + (s * self.mixing.tail_mean(c) if c < self.hi else 0.0)

    def entries(self, R: int) -> np.ndarray:
        out = np.zeros(R + 1)
        s, logpdf = self.s, self.mixing.logpdf
        for r0 in range(0, R + 1, _BLOCK):
            r1 = min(R, r0 + _BLOCK - 1)
            xa = max(self.lo, _lam_floor(r0) / s)
            xb = min(self.hi, _lam_ceiling(r1) / s)
            if not xb > xa:
                continue
            r = np.arange(r0, r1 + 1, dtype=float)
            lgam = special.gammaln(r + 1)

            def fun(x, r=r, lgam=lgam):
                lam = s * x
                return np.exp(logpdf(x) + special.xlogy(r, lam) - lam - lgam)

            pts = np.linspace(max(xa, r0 / s), min(xb, r1 / s), 4)
            pts = [p for p in pts if xa < p < xb]
            val, _ = integrate.quad_vec(fun, xa, xb, epsabs=self.qtol, epsrel=1e-10, norm="max",
                                        points=pts or None, limit=2000)
            out[r0 : r1 + 1] = np.maximum(val, 0.0)
        return out


def poisson_pmf(lam: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DiscretePMF:
    return DiscretePMF.poisson(lam, tail_tol)


def dense_poisson(lam: float, length: int) -> np.ndarray:
    """Poisson(lam) probabilities on ``0 .. length-1`` (no tail bookkeeping)."""
    return stats.poisson.pmf(np.arange(length), lam)
