"""Input laws for the graph weights, set sizes and limit variables.

A :class:`DistributionSpec` is an immutable, hashable description of a
nonnegative law.  It knows its moments, tails, sampler and (for laws on the
integers) how to tabulate itself into a :class:`~rigdeg.distributions.pmf.DiscretePMF`.

The textual grammar is ``family:arg1,arg2``::

    constant:2          poisson:1.5        geometric:0.3
    zeta:2.5            truncated-zeta:2.333333,1000000
    uniform-int:1,5     empirical:@sizes.csv   empirical:1=0.5,3=0.5
    pareto:1.5,1.0      exponential:2      gamma:2,0.5     uniform-real:0,1
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special, stats

from rigdeg.errors import DomainError, ParameterError, TruncationError

INFINITE = math.inf

_PARAM_NAMES: dict[str, tuple[str, ...]] = {
    "constant": ("c",),
    "poisson": ("lam",),
    "geometric": ("p",),
    "zeta": ("s",),
    "truncated-zeta": ("s", "kmax"),
    "uniform-int": ("a", "b"),
    "empirical": (),
    "pareto": ("alpha", "xmin"),
    "exponential": ("rate",),
    "gamma": ("shape", "scale"),
    "uniform-real": ("a", "b"),
}
_DISCRETE = {"constant", "poisson", "geometric", "zeta", "truncated-zeta", "uniform-int", "empirical"}
_INTEGER_FAMILIES = {"poisson", "geometric", "zeta", "truncated-zeta", "uniform-int"}

# Hard ceiling on tabulated supports; set sizes and mixed-Poisson supports beyond
# this are not representable as dense arrays at desk scale.
MAX_TABLE = 1 << 22


def _is_int(v: float) -> bool:
    return float(v).is_integer()


@dataclass(frozen=True)
class DistributionSpec:
    """A named nonnegative law.

    ``params`` holds the family parameters in the order of the textual grammar;
    ``table`` holds ``(value, probability)`` pairs for the empirical family.
    """

    family: str
    params: tuple[float, ...] = ()
    table: tuple[tuple[float, float], ...] = ()

    # ---- construction -------------------------------------------------

    def __post_init__(self):
        if self.family not in _PARAM_NAMES:
            raise ParameterError(f"unknown distribution family {self.family!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        names = _PARAM_NAMES[self.family]
        if len(self.params) != len(names):
            raise ParameterError(
                f"{self.family} expects {len(names)} parameter(s) {names}, got {len(self.params)}"
            )
        if any(not math.isfinite(p) for p in self.params):
            raise ParameterError(f"{self.family}: parameters must be finite, got {self.params}")
        self._validate()

    def _validate(self):
        f, p = self.family, self.params
        bad = None
        if f == "constant" and p[0] < 0:
            bad = "c >= 0"
        elif f == "poisson" and p[0] < 0:
            bad = "lam >= 0"
        elif f == "geometric" and not 0 < p[0] <= 1:
            bad = "0 < p <= 1"
        elif f == "zeta" and p[0] <= 1:
            bad = "s > 1"
        elif f == "truncated-zeta" and not (_is_int(p[1]) and 1 <= p[1] <= MAX_TABLE):
            bad = f"kmax integer in [1, {MAX_TABLE}]"
        elif f == "uniform-int" and not (_is_int(p[0]) and _is_int(p[1]) and 0 <= p[0] <= p[1]):
            bad = "integers 0 <= a <= b"
        elif f == "pareto" and not (p[0] > 0 and p[1] > 0):
            bad = "alpha > 0 and xmin > 0"
        elif f == "exponential" and p[0] <= 0:
            bad = "rate > 0"
        elif f == "gamma" and not (p[0] > 0 and p[1] > 0):
            bad = "shape > 0 and scale > 0"
        elif f == "uniform-real" and not 0 <= p[0] <= p[1]:
            bad = "0 <= a <= b"
        elif f == "empirical":
            table = tuple((float(v), float(w)) for v, w in self.table)
            object.__setattr__(self, "table", table)
            if not table:
                bad = "a nonempty value table"
            elif any(v < 0 or not math.isfinite(v) for v, _ in table):
                bad = "nonnegative finite values"
            elif any(w < 0 or not math.isfinite(w) for _, w in table):
                bad = "nonnegative probabilities"
            elif abs(math.fsum(w for _, w in table) - 1.0) > 1e-12:
                bad = "probabilities summing to 1 within 1e-12"
        if bad:
            raise ParameterError(f"{self.family}{self.params or ''}: requires {bad}")

    @classmethod
    def constant(cls, c):
        return cls("constant", (c,))

    @classmethod
    def poisson(cls, lam):
        return cls("poisson", (lam,))

    @classmethod
    def geometric(cls, p):
        return cls("geometric", (p,))

    @classmethod
    def zeta(cls, s):
        return cls("zeta", (s,))

    @classmethod
    def truncated_zeta(cls, s, kmax):
        return cls("truncated-zeta", (s, kmax))

    @classmethod
    def uniform_int(cls, a, b):
        return cls("uniform-int", (a, b))

    @classmethod
    def empirical(cls, values, probs):
        return cls("empirical", (), tuple(zip(values, probs)))

    @classmethod
    def pareto(cls, alpha, xmin=1.0):
        return cls("pareto", (alpha, xmin))

    @classmethod
    def exponential(cls, rate):
        return cls("exponential", (rate,))

    @classmethod
    def gamma(cls, shape, scale):
        return cls("gamma", (shape, scale))

    @classmethod
    def uniform_real(cls, a, b):
        return cls("uniform-real", (a, b))

    # ---- structure ----------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        return self.family in _DISCRETE

    @property
    def is_integer_valued(self) -> bool:
        if self.family in _INTEGER_FAMILIES:
            return True
        if self.family == "constant":
            return _is_int(self.params[0])
        if self.family == "empirical":
            return all(_is_int(v) for v, _ in self.table)
        return False

    def support(self) -> tuple[float, float]:
        """Closed hull ``(lo, hi)`` of the support; ``hi`` may be infinite."""
        f, p = self.family, self.params
        if f == "constant":
            return p[0], p[0]
        if f == "poisson":
            return 0.0, (0.0 if p[0] == 0 else INFINITE)
        if f == "geometric":
            return 1.0, (1.0 if p[0] == 1 else INFINITE)
        if f == "zeta":
            return 1.0, INFINITE
        if f == "truncated-zeta":
            return 1.0, p[1]
        if f in ("uniform-int", "uniform-real"):
            return p[0], p[1]
        if f == "empirical":
            vals = [v for v, w in self.table if w > 0]
            return min(vals), max(vals)
        if f == "pareto":
            return p[1], INFINITE
        return 0.0, INFINITE

    def to_text(self) -> str:
        if self.family == "empirical":
            return "empirical:" + ",".join(f"{_fmt(v)}={w!r}" for v, w in self.table)
        return f"{self.family}:" + ",".join(_fmt(p) for p in self.params)

    def __str__(self) -> str:
        return self.to_text()

    # ---- analytic quantities -------------------------------------------

    def moment(self, k: float, tol: float = 1e-12) -> float:
        """``E X**k`` for real ``k > 0``; ``math.inf`` when it diverges."""
        if not k > 0:
            raise ParameterError(f"moment order must be positive, got {k}")
        f, p = self.family, self.params
        if f == "constant":
            return p[0] ** k
        if f == "pareto":
            alpha, xm = p
            return INFINITE if _at_least(k, alpha) else alpha * xm**k / (alpha - k)
        if f == "zeta":
            s = p[0]
            return INFINITE if _at_least(k, s - 1) else float(special.zeta(s - k) / special.zeta(s))
        if f == "exponential":
            return math.exp(special.gammaln(k + 1) - k * math.log(p[0]))
        if f == "gamma":
            shape, scale = p
            return math.exp(k * math.log(scale) + special.gammaln(shape + k) - special.gammaln(shape))
        if f == "uniform-real":
            a, b = p
            if a == b:
                return a**k
            return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
        if f in ("truncated-zeta", "uniform-int", "empirical"):
            vals, w = self._finite_atoms()
            return math.fsum(w * vals**k)
        if f == "poisson":
            lam = p[0]
            if lam == 0:
                return 0.0
            return _series_moment(lambda j: stats.poisson.logpmf(j, lam), k, 0, tol)
        if f == "geometric":
            q = p[0]
            if q == 1:
                return 1.0
            return _series_moment(lambda j: stats.geom.logpmf(j, q), k, 1, tol)
        raise AssertionError(f)

    def mean(self) -> float:
        return self.moment(1.0)

    def sf(self, x: float) -> float:
        """``P(X > x)``."""
        f, p = self.family, self.params
        if x < 0:
            return 1.0
        if f == "constant":
            return 1.0 if p[0] > x else 0.0
        if f == "poisson":
            return float(stats.poisson.sf(math.floor(x), p[0]))
        if f == "geometric":
            return (1.0 - p[0]) ** max(math.floor(x), 0)
        if f == "zeta":
            return float(special.zeta(p[0], math.floor(x) + 1) / special.zeta(p[0]))
        if f in ("truncated-zeta", "uniform-int", "empirical"):
            vals, w = self._finite_atoms()
            return math.fsum(w[vals > x])
        if f == "pareto":
            alpha, xm = p
            return 1.0 if x < xm else (xm / x) ** alpha
        if f == "exponential":
            return math.exp(-p[0] * x)
        if f == "gamma":
            return float(special.gammaincc(p[0], x / p[1]))
        if f == "uniform-real":
            a, b = p
            if a == b:
                return 1.0 if a > x else 0.0
            return min(1.0, max(0.0, (b - x) / (b - a)))
        raise AssertionError(f)

    def tail_mean(self, threshold: float) -> float:
        """``E[X 1{X > threshold}]``, analytic or by exact summation."""
        f, p = self.family, self.params
        M = float(threshold)
        if M < 0:
            return self.mean()
        if f == "constant":
            return p[0] if p[0] > M else 0.0
        if f == "poisson":
            lam = p[0]
            return lam * float(stats.poisson.sf(math.floor(M) - 1, lam))
        if f == "geometric":
            K = math.floor(M) + 1
            q = p[0]
            return (K - 1 + 1 / q) * (1 - q) ** (K - 1)
        if f == "zeta":
            s = p[0]
            if _at_least(1.0, s - 1):
                return INFINITE
            return float(special.zeta(s - 1, math.floor(M) + 1) / special.zeta(s))
        if f in ("truncated-zeta", "uniform-int", "empirical"):
            vals, w = self._finite_atoms()
            sel = vals > M
            return math.fsum(w[sel] * vals[sel])
        if f == "pareto":
            alpha, xm = p
            if _at_least(1.0, alpha):
                return INFINITE
            if M < xm:
                return self.mean()
            return alpha * xm**alpha * M ** (1 - alpha) / (alpha - 1)
        if f == "exponential":
            rate = p[0]
            return math.exp(-rate * M) * (M + 1 / rate)
        if f == "gamma":
            shape, scale = p
            return shape * scale * float(special.gammaincc(shape + 1, M / scale))
        if f == "uniform-real":
            a, b = p
            if a == b:
                return a if a > M else 0.0
            lo = max(M, a)
            return 0.0 if lo >= b else (b * b - lo * lo) / (2 * (b - a))
        raise AssertionError(f)

    def logpdf(self, x):
        """Log density of a continuous family (vectorized, ``-inf`` off the support)."""
        f, p = self.family, self.params
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if f == "pareto":
                alpha, xm = p
                val = math.log(alpha) + alpha * math.log(xm) - (alpha + 1) * np.log(x)
                out = np.where(x >= xm, val, -np.inf)
            elif f == "exponential":
                out = np.where(x >= 0, math.log(p[0]) - p[0] * x, -np.inf)
            elif f == "gamma":
                shape, scale = p
                val = special.xlogy(shape - 1, x) - x / scale - special.gammaln(shape) - shape * math.log(scale)
                out = np.where(x >= 0, val, -np.inf)
            elif f == "uniform-real" and p[1] > p[0]:
                out = np.where((x >= p[0]) & (x <= p[1]), -math.log(p[1] - p[0]), -np.inf)
            else:
                raise ParameterError(f"{self} has no density")
        return out if out.ndim else float(out)

    # ---- atoms / tabulation ----------------------------------------------

    def _finite_atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return _finite_atoms(self)

    def atoms(self, vmax: float) -> tuple[np.ndarray, np.ndarray, float]:
        """Support points ``<= vmax`` with their weights, and the mass ``P(X > vmax)``."""
        if not self.is_discrete:
            raise ParameterError(f"{self.family} is not discrete")
        f, p = self.family, self.params
        lo, hi = self.support()
        if hi <= vmax:
            vals, w = self._finite_atoms()
            return vals, w, 0.0
        top = math.floor(vmax)
        if top < lo:
            return np.empty(0), np.empty(0), 1.0
        if top - lo + 1 > MAX_TABLE:
            raise TruncationError(f"{self}: atom table beyond {MAX_TABLE} entries")
        ks = np.arange(int(lo), top + 1)
        w = self._integer_probs(ks)
        return ks.astype(float), w, self.sf(top)

    def _integer_probs(self, ks: np.ndarray) -> np.ndarray:
        f, p = self.family, self.params
        if f == "poisson":
            return stats.poisson.pmf(ks, p[0])
        if f == "geometric":
            return stats.geom.pmf(ks, p[0])
        if f == "zeta":
            return ks.astype(float) ** (-p[0]) / special.zeta(p[0])
        vals, w = self._finite_atoms()
        out = np.zeros(len(ks))
        idx = np.searchsorted(ks, vals)
        ok = (idx < len(ks)) & (ks[np.minimum(idx, len(ks) - 1)] == vals)
        np.add.at(out, idx[ok], w[ok])
        return out

    def integer_pmf(self, tail_tol: float = 1e-9, max_support: int = 1 << 15, tail_order: int = 0):
        """Tabulate an integer-valued law as a :class:`DiscretePMF`.

        The stored support ``[lo, K]`` is the shortest one for which the
        neglected tail is at most ``tail_tol``.  With ``tail_order=0`` the
        neglected tail is the probability ``P(X > K)``; with ``tail_order=1``
        it is the size-biased mass ``E[X; X > K] / E X``, which is what a
        later :func:`size_bias_shift` loses.
        """
        from rigdeg.distributions.pmf import DiscretePMF

        if not self.is_integer_valued:
            raise ParameterError(f"{self} is not an integer-valued law")
        lo, hi = self.support()
        lo = int(lo)
        mean = self.mean()
        if tail_order == 0:
            tail = self.sf
        elif tail_order == 1:
            if not 0 < mean < INFINITE:
                raise TruncationError(f"{self}: size-biased tail needs 0 < E X < inf")
            tail = lambda K: self.tail_mean(K) / mean  # noqa: E731
        else:
            raise ParameterError("tail_order must be 0 or 1")
        kcap = lo + max_support - 1
        K = _smallest_index(tail, lo, min(hi, kcap), tail_tol)
        if K is None:
            achieved = tail(kcap)
            raise TruncationError(
                f"{self}: tail {achieved:.3g} > tail_tol {tail_tol:.3g} at max_support {max_support}",
                achieved=achieved,
            )
        ks = np.arange(lo, K + 1)
        probs = self._integer_probs(ks)
        return DiscretePMF(lo, probs, tail_mass=self.sf(K), mean=mean, tail_tol=tail_tol)

    def capped(self, cap: int) -> DistributionSpec:
        """The law of ``min(X, cap)`` as an empirical spec on ``{lo, ..., cap}``."""
        if not self.is_integer_valued:
            raise ParameterError(f"{self} is not an integer-valued law")
        cap = int(cap)
        lo, hi = self.support()
        if hi <= cap:
            return self
        if cap < lo:
            return DistributionSpec.constant(cap)
        ks = np.arange(int(lo), cap + 1)
        w = self._integer_probs(ks)
        w[-1] = self.sf(cap - 1)
        # renormalize rounding so the table passes the 1e-12 sum check
        w = w / math.fsum(w)
        keep = w > 0
        return DistributionSpec.empirical(ks[keep].tolist(), w[keep].tolist())

    # ---- sampling ------------------------------------------------------

    def sample(self, rng: np.random.Generator, size=None):
        """Draw i.i.d. values; ``size=None`` returns a scalar."""
        f, p = self.family, self.params
        if f == "constant":
            return p[0] if size is None else np.full(size, p[0])
        if f == "poisson":
            return rng.poisson(p[0], size)
        if f == "geometric":
            return rng.geometric(p[0], size)
        if f == "zeta":
            return rng.zipf(p[0], size)
        if f in ("truncated-zeta", "uniform-int", "empirical"):
            vals, cdf = _inverse_cdf(self)
            u = rng.random(size)
            idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(vals) - 1)
            out = vals[idx]
            return out.item() if size is None else out
        if f == "pareto":
            return p[1] * (1.0 + rng.pareto(p[0], size))
        if f == "exponential":
            return rng.exponential(1.0 / p[0], size)
        if f == "gamma":
            return rng.gamma(p[0], p[1], size)
        if f == "uniform-real":
            return rng.uniform(p[0], p[1], size)
        raise AssertionError(f)


def _at_least(k: float, bound: float) -> bool:
    """``k >= bound`` allowing for rounding in parameters like ``7/3 - 1`` versus ``4/3``."""
    return k >= bound - 1e-12 * max(1.0, abs(bound))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() and abs(v) < 1e15 else repr(float(v))


def _series_moment(logpmf, k: float, start: int, tol: float) -> float:
    """Sum ``j**k p(j)`` over ``j >= start``.

    Stops once the term ratio ``r`` is below 1 and the geometric bound
    ``term * r / (1 - r)`` on the remainder is below ``tol`` relative; the ratio
    is nonincreasing for the Poisson and geometric families this serves.
    """
    partial = []
    j = start
    block = 256
    while j < 1 << 26:
        js = np.arange(j, j + block, dtype=float)
        with np.errstate(divide="ignore"):
            logt = logpmf(js) + k * np.log(js)
        partial.append(math.fsum(np.exp(logt)))
        total = math.fsum(partial)
        if total > 0 and np.isfinite(logt[-2]):
            ratio = math.exp(logt[-1] - logt[-2])
            if ratio < 1 and math.exp(logt[-1]) * ratio / (1 - ratio) <= tol * total:
                return total
        j += block
        block *= 2
    raise DomainError("moment series did not converge")


def _smallest_index(tail, lo: int, hi: float, tol: float) -> int | None:
    """Smallest integer ``K`` in ``[lo, hi]`` with ``tail(K) <= tol`` (tail nonincreasing)."""
    hi_i = int(hi) if math.isfinite(hi) else None
    if tail(lo) <= tol:
        return lo
    step = 1
    prev = lo
    while True:
        cand = lo + step
        if hi_i is not None and cand >= hi_i:
            cand = hi_i
            if tail(cand) > tol:
                return None
            break
        if tail(cand) <= tol:
            break
        prev = cand
        step *= 2
    a, b = prev, cand  # tail(a) > tol >= tail(b)
    while b - a > 1:
        mid = (a + b) // 2
        if tail(mid) <= tol:
            b = mid
        else:
            a = mid
    return b


@functools.lru_cache(maxsize=64)
def _finite_atoms(spec: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    f, p = spec.family, spec.params
    if f == "constant":
        vals, w = np.array([p[0]]), np.array([1.0])
    elif f == "truncated-zeta":
        ks = np.arange(1, int(p[1]) + 1, dtype=float)
        w = ks ** (-p[0])
        vals, w = ks, w / math.fsum(w)
    elif f == "uniform-int":
        vals = np.arange(int(p[0]), int(p[1]) + 1, dtype=float)
        w = np.full(len(vals), 1.0 / len(vals))
    elif f == "empirical":
        vals = np.array([v for v, _ in spec.table])
        w = np.array([q for _, q in spec.table])
        order = np.argsort(vals, kind="stable")
        vals, w = vals[order], w[order]
        uniq, inv = np.unique(vals, return_inverse=True)
        agg = np.zeros(len(uniq))
        np.add.at(agg, inv, w)
        vals, w = uniq, agg
    else:
        raise ParameterError(f"{f} has no finite atom table")
    vals.setflags(write=False)
    w.setflags(write=False)
    return vals, w


@functools.lru_cache(maxsize=64)
def _inverse_cdf(spec: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    vals, w = _finite_atoms(spec)
    cdf = np.cumsum(w)
    cdf[-1] = 1.0
    if spec.is_integer_valued:
        vals = vals.astype(np.int64)
    return vals, cdf


def moment(spec: DistributionSpec, k: float, tol: float = 1e-12) -> float:
    """``E X**k``, or ``math.inf`` when the moment diverges."""
    return spec.moment(k, tol)


def sample(spec: DistributionSpec, rng: np.random.Generator, size=None):
    return spec.sample(rng, size)


def parse_spec(text: str, base_dir: str | Path | None = None) -> DistributionSpec:
    """Parse the textual grammar; ``empirical:@file.csv`` reads ``value,probability`` rows."""
    if isinstance(text, DistributionSpec):
        return text
    family, sep, rest = str(text).strip().partition(":")
    family = family.strip().lower().replace("_", "-")
    if not sep:
        raise ParameterError(f"distribution {text!r} must look like 'family:args'")
    if family not in _PARAM_NAMES:
        raise ParameterError(f"unknown distribution family {family!r} in {text!r}")
    rest = rest.strip()
    if family == "empirical":
        if rest.startswith("@"):
            path = Path(rest[1:])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            pairs = _read_table(path)
        else:
            pairs = []
            for item in filter(None, (s.strip() for s in rest.split(","))):
                v, eq, w = item.partition("=")
                if not eq:
                    raise ParameterError(f"empirical entry {item!r} must be value=probability")
                pairs.append((float(v), float(w)))
        return DistributionSpec("empirical", (), tuple(pairs))
    try:
        params = tuple(float(s) for s in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise ParameterError(f"cannot parse parameters of {text!r}: {exc}") from None
    return DistributionSpec(family, params)


def _read_table(path: Path) -> list[tuple[float, float]]:
    import csv

    if not path.exists():
        raise ParameterError(f"empirical table {path} does not exist")
    pairs = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not "".join(row).strip():
                continue
            try:
                pairs.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0:
                    continue  # header
                raise ParameterError(f"{path}:{i + 1}: bad row {row!r}") from None
    return pairs
