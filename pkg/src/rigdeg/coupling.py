"""Truncation coupling of a graph with its light and heavy parts.

Attribute weights (inhomogeneous model) or set sizes (passive model) at most
``M`` are routed to the light graph ``G^``; the rest go to the heavy graph
``G~``.  All three graphs share every weight and every edge uniform, so the
degrees of the first vertex obey ``d_hat <= d_full <= d_hat + d_check`` on
every single draw, and ``P(d_check >= 1)`` is controlled by the expected
heavy weight.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from rigdeg.distributions.spec import INFINITE
from rigdeg.errors import ConfigError, DomainError, InvariantViolation
from rigdeg.models import (
    InhomogeneousConfig,
    Membership,
    PassiveConfig,
    run_replications,
    v1_attributes,
    w1_sets,
)
from rigdeg.rng import replication_rng


@dataclass(frozen=True)
class TruncationConfig:
    """Split level: weights ``<= M`` are light, weights ``> M`` are heavy."""

    M: float

    def __post_init__(self):
        m = float(self.M)
        if not m > 0 or math.isnan(m):
            raise ConfigError(f"truncation level M must be > 0, got {self.M}")
        object.__setattr__(self, "M", m)


@dataclass(frozen=True)
class CoupledDegrees:
    d_hat: int
    d_check: int
    d_full: int

    def __post_init__(self):
        if not (self.d_hat <= self.d_full <= self.d_hat + self.d_check):
            raise InvariantViolation(
                f"sandwich violated: d_hat={self.d_hat}, d_full={self.d_full}, d_check={self.d_check}",
                diagnostics=asdict(self),
            )


def _union_size(groups, seen: Membership) -> int:
    if not groups:
        return 0
    if len(groups) == 1:
        return len(groups[0])
    seen.reset()
    for g in groups:
        seen.add(g)
    return seen.count


def _split(weights: np.ndarray, groups: list[np.ndarray], M: float, seen: Membership) -> CoupledDegrees:
    light = weights <= M
    d_hat = _union_size([g for g, ok in zip(groups, light) if ok], seen)
    d_check = _union_size([g for g, ok in zip(groups, light) if not ok], seen)
    d_full = _union_size(groups, seen)
    return CoupledDegrees(d_hat, d_check, d_full)


def sample_coupled_inhomogeneous(cfg: InhomogeneousConfig, trunc: TruncationConfig, rng: np.random.Generator,
                                 scratch: Membership | None = None) -> CoupledDegrees:
    """One joint draw of the degree of ``v_1`` in ``G``, ``G^`` and ``G~``.

    Consumes the stream exactly like :func:`rigdeg.models.sample_degree_inhomogeneous`,
    so ``d_full`` equals the uncoupled degree drawn from the same generator.
    """
    x, rows = v1_attributes(cfg, rng)
    return _split(x, rows, trunc.M, scratch if scratch is not None else Membership(cfg.n - 1))


def sample_coupled_passive(cfg: PassiveConfig, trunc: TruncationConfig, rng: np.random.Generator,
                           scratch: Membership | None = None) -> CoupledDegrees:
    """One joint draw for the passive model; each ``D_i`` is light iff ``|D_i| <= M``."""
    sizes, members = w1_sets(cfg, rng)
    return _split(sizes.astype(float), members, trunc.M, scratch if scratch is not None else Membership(cfg.m))


def tail_bound_inhomogeneous(cfg: InhomogeneousConfig, M: float, tol: float = 1e-10) -> float:
    """``b1 sqrt(m/n) E[X 1{X > M}]``, an upper bound on ``P(d_check >= 1)``.

    ``tol`` is accepted for interface symmetry; every supported family has a
    closed-form or exactly summed tail mean.
    """
    a1, b1 = cfg.p1.mean(), cfg.p2.mean()
    if a1 == INFINITE or b1 == INFINITE:
        raise DomainError(f"tail bound needs E X_1 < inf and E Y_1 < inf (got {a1}, {b1})")
    return b1 * math.sqrt(cfg.m / cfg.n) * cfg.p1.tail_mean(M)


def tail_bound_passive(cfg: PassiveConfig, M: float, tol: float = 1e-10) -> float:
    """``(n/m) E[X 1{X > M}]`` with ``X = |D_1|``, summed exactly over the support above ``M``."""
    return cfg.n / cfg.m * cfg.p.tail_mean(M)


def tail_bound(cfg, M: float) -> float:
    if isinstance(cfg, InhomogeneousConfig):
        return tail_bound_inhomogeneous(cfg, M)
    return tail_bound_passive(cfg, M)


@dataclass(eq=False)
class CoupledBatch:
    """Columns ``d_hat, d_check, d_full`` over replications."""

    table: np.ndarray
    model: str
    config: dict
    seed: int
    M: float

    @property
    def d_hat(self) -> np.ndarray:
        return self.table[:, 0]

    @property
    def d_check(self) -> np.ndarray:
        return self.table[:, 1]

    @property
    def d_full(self) -> np.ndarray:
        return self.table[:, 2]

    def __len__(self):
        return len(self.table)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        lines = ["replication,d_hat,d_check,d_full"]
        lines += [f"{i},{a},{b},{c}" for i, (a, b, c) in enumerate(self.table.tolist())]
        path.write_text("\n".join(lines) + "\n")
        return path


def _coupled_chunk(cfg, seed: int, start: int, stop: int, levels: tuple[float, ...]) -> np.ndarray:
    """Shape ``(stop - start, len(levels), 3)``; every level splits the same draw."""
    if isinstance(cfg, InhomogeneousConfig):
        draw, size = v1_attributes, cfg.n - 1
    else:
        draw, size = w1_sets, cfg.m
    scratch = Membership(size)
    out = np.empty((stop - start, len(levels), 3), dtype=np.int64)
    for k, r in enumerate(range(start, stop)):
        weights, groups = draw(cfg, replication_rng(seed, r))
        weights = np.asarray(weights, dtype=float)
        for j, M in enumerate(levels):
            try:
                c = _split(weights, groups, M, scratch)
            except InvariantViolation as exc:
                exc.diagnostics.update(replication=r, seed=seed, M=M, config=cfg.snapshot())
                raise
            out[k, j] = (c.d_hat, c.d_check, c.d_full)
    return out


def simulate_coupled_levels(cfg, levels, reps: int, seed: int, threads: int = 1) -> dict[float, CoupledBatch]:
    """Coupled draws at several truncation levels, all sharing one graph per replication.

    Replication ``r`` at level ``M`` is identical to what :func:`simulate_coupled`
    returns for that level alone.
    """
    levels = tuple(TruncationConfig(M).M for M in levels)
    table = run_replications(_coupled_chunk, cfg, reps, seed, threads, levels)
    return {M: CoupledBatch(table[:, j], cfg.model, cfg.snapshot(), int(seed), M) for j, M in enumerate(levels)}


def simulate_coupled(cfg, trunc: TruncationConfig, reps: int, seed: int, threads: int = 1) -> CoupledBatch:
    """Coupled draws over ``reps`` replications; raises on the first sandwich violation."""
    return simulate_coupled_levels(cfg, [trunc.M], reps, seed, threads)[trunc.M]


@dataclass
class TailBoundReport:
    bound: float
    f_hat: float
    sigma: float
    verdict: str
    vacuous: bool
    replications: int
    sandwich: list[dict]

    def to_json(self, path: str | Path | None = None, extra: dict | None = None) -> str:
        doc = asdict(self)
        if extra:
            doc.update(extra)
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def verify_tail_bound(batch: CoupledBatch | np.ndarray, bound: float, k_cap: int = 20) -> TailBoundReport:
    """Check ``P(d_check >= 1) <= min(1, bound)`` up to three binomial standard errors.

    ``sandwich`` lists, for ``k = 0 .. k_cap``, the empirical frequencies of
    ``d_hat >= k`` and ``d_full >= k`` next to ``P(d_hat >= k) + f_hat``.
    """
    table = batch.table if isinstance(batch, CoupledBatch) else np.asarray(batch)
    reps = len(table)
    if reps == 0:
        raise ConfigError("coupled batch is empty")
    d_hat, d_check, d_full = table[:, 0], table[:, 1], table[:, 2]
    bad = np.flatnonzero((d_hat > d_full) | (d_full > d_hat + d_check))
    if len(bad):
        raise InvariantViolation(f"sandwich violated in {len(bad)} rows", diagnostics={"rows": bad[:20].tolist()})
    f_hat = float(np.count_nonzero(d_check >= 1)) / reps
    sigma = math.sqrt(f_hat * (1 - f_hat) / reps)
    vacuous = bound >= 1
    verdict = "pass" if f_hat <= min(1.0, bound) + 3 * sigma else "fail"
    rows = []
    for k in range(k_cap + 1):
        lo = float(np.count_nonzero(d_hat >= k)) / reps
        mid = float(np.count_nonzero(d_full >= k)) / reps
        rows.append({"k": k, "p_hat_ge_k": lo, "p_full_ge_k": mid, "upper": lo + f_hat})
    return TailBoundReport(float(bound), f_hat, sigma, verdict, bool(vacuous), reps, rows)
