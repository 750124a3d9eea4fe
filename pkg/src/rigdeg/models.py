"""Degree of a fixed vertex in the inhomogeneous and passive intersection graphs.

Two samplers per model:

* fast samplers that draw only what the degree of the first vertex depends on
  (its attributes and their neighbourhoods, or the sets that contain it);
* full-graph oracles that materialize every bipartite edge and read all
  degrees off the intersection graph.  They are meant for small instances and
  serve as the reference the fast samplers are checked against.

Both have exactly the same marginal law for the degree of the first vertex.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import InitVar, dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from rigdeg.distributions.spec import INFINITE, DistributionSpec, parse_spec
from rigdeg.errors import ConfigError
from rigdeg.rng import chunk_bounds, replication_rng

ORACLE_MAX_CELLS = 10**7
_ROW_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class InhomogeneousConfig:
    """``n`` vertices with weights ``Y ~ p2``, ``m`` attributes with weights ``X ~ p1``.

    Attribute ``w_i`` and vertex ``v_j`` are joined with probability
    ``min(1, X_i Y_j / sqrt(n m))``.
    """

    n: int
    m: int
    p1: DistributionSpec
    p2: DistributionSpec
    model = "inhomogeneous"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 0:
            raise ConfigError(f"m must be a nonnegative integer, got {self.m}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "p1", parse_spec(self.p1))
        object.__setattr__(self, "p2", parse_spec(self.p2))

    @property
    def edge_scale(self) -> float:
        return 0.0 if self.m == 0 else 1.0 / math.sqrt(self.n * self.m)

    def snapshot(self) -> dict:
        return {"model": self.model, "n": self.n, "m": self.m, "p1": self.p1.to_text(), "p2": self.p2.to_text()}

    def expected_trials(self) -> float:
        """Bernoulli trials one fast sample costs on average (upper estimate)."""
        a1, b1 = self.p1.mean(), self.p2.mean()
        if not (math.isfinite(a1) and math.isfinite(b1)):
            return INFINITE
        linked = min(self.m, self.m * a1 * b1 * self.edge_scale)
        return self.m + (self.n - 1) * linked


@dataclass(frozen=True)
class PassiveConfig:
    """``n`` random subsets of an ``m``-set ``W``; subset sizes follow ``p``.

    A subset of size ``k`` is uniform among the ``C(m, k)`` subsets of that size.
    """

    n: int
    m: int
    p: DistributionSpec
    model = "passive"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be a positive integer, got {self.m}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m))
        p = parse_spec(self.p)
        object.__setattr__(self, "p", p)
        if not p.is_integer_valued:
            raise ConfigError(f"set-size law {p} must be integer valued")
        if p.support()[1] > self.m and math.isfinite(p.support()[1]):
            raise ConfigError(f"set-size law {p} has support beyond m = {self.m}")

    @classmethod
    def capped(cls, n: int, m: int, z: DistributionSpec) -> PassiveConfig:
        """Sizes distributed as ``min(Z, m)``."""
        return cls(n, m, parse_spec(z).capped(m))

    def snapshot(self) -> dict:
        return {"model": self.model, "n": self.n, "m": self.m, "p": self.p.to_text()}

    def expected_trials(self) -> float:
        second = self.p.moment(2)
        return self.n + self.n * second / self.m


# ---- fast samplers ------------------------------------------------------------


class Membership:
    """Epoch-stamped set over ``range(size)``; ``reset`` is O(1)."""

    def __init__(self, size: int):
        self.stamp = np.zeros(max(int(size), 1), dtype=np.int64)
        self.epoch = 0
        self.count = 0

    def reset(self):
        self.epoch += 1
        self.count = 0

    def add(self, idx: np.ndarray):
        """Insert indices; ``idx`` must not contain duplicates."""
        new = idx[self.stamp[idx] != self.epoch]
        self.stamp[new] = self.epoch
        self.count += len(new)


def v1_attributes(cfg: InhomogeneousConfig, rng: np.random.Generator) -> tuple[np.ndarray, list[np.ndarray]]:
    """Weights of the attributes linked to ``v_1`` and, for each, its neighbours among ``v_2..v_n``.

    Neighbour indices are 0-based over ``v_2..v_n``.  Draw order: ``Y_1``,
    ``X_1..X_m``, the ``m`` link uniforms, then (only if some attribute is
    linked) ``Y_2..Y_n`` and one row of ``n - 1`` edge uniforms per linked
    attribute in index order.
    """
    scale = cfg.edge_scale
    y1 = float(cfg.p2.sample(rng))
    x = np.asarray(cfg.p1.sample(rng, cfg.m), dtype=float)
    u_link = rng.random(cfg.m)
    linked = np.flatnonzero(u_link < np.minimum(1.0, x * (y1 * scale)))
    xs = x[linked]
    if len(linked) == 0 or cfg.n == 1:
        return xs, [np.empty(0, dtype=np.int64) for _ in linked]
    y = np.asarray(cfg.p2.sample(rng, cfg.n - 1), dtype=float) * scale
    rows: list[np.ndarray] = []
    step = max(1, _ROW_CHUNK_CELLS // (cfg.n - 1))
    for a in range(0, len(xs), step):
        xa = xs[a : a + step]
        u = rng.random((len(xa), cfg.n - 1))
        hits = u < np.minimum(1.0, np.outer(xa, y))
        rows.extend(np.flatnonzero(h) for h in hits)
    return xs, rows


def sample_degree_inhomogeneous(cfg: InhomogeneousConfig, rng: np.random.Generator,
                                scratch: Membership | None = None) -> int:
    """Degree of ``v_1``: the number of other vertices sharing an attribute with it."""
    _, rows = v1_attributes(cfg, rng)
    if not rows:
        return 0
    if len(rows) == 1:
        return len(rows[0])
    seen = scratch if scratch is not None else Membership(cfg.n - 1)
    seen.reset()
    for r in rows:
        seen.add(r)
    return seen.count


def w1_sets(cfg: PassiveConfig, rng: np.random.Generator) -> tuple[np.ndarray, list[np.ndarray]]:
    """Sizes of the subsets containing ``w_1`` and their other members (indices ``1..m-1``).

    Each ``D_i`` draws its size ``X_i``, contains ``w_1`` with probability
    ``X_i / m`` and, if so, takes ``X_i - 1`` further elements uniformly without
    replacement from ``W \\ {w_1}``.
    """
    sizes = np.asarray(cfg.p.sample(rng, cfg.n), dtype=np.int64)
    top = int(sizes.max())
    if top > cfg.m:
        raise ConfigError(f"drew set size {top} > m = {cfg.m} from {cfg.p}")
    hit = np.flatnonzero(rng.random(cfg.n) < sizes / cfg.m)
    members = []
    for i in hit:
        k = int(sizes[i]) - 1
        if k > 0:
            members.append(1 + rng.choice(cfg.m - 1, size=k, replace=False, shuffle=False))
        else:
            members.append(np.empty(0, dtype=np.int64))
    return sizes[hit], members


def sample_degree_passive(cfg: PassiveConfig, rng: np.random.Generator,
                          scratch: Membership | None = None) -> int:
    """Degree of ``w_1``: distinct co-members over all subsets containing it."""
    _, members = w1_sets(cfg, rng)
    if not members:
        return 0
    if len(members) == 1:
        return len(members[0])
    seen = scratch if scratch is not None else Membership(cfg.m)
    seen.reset()
    for mem in members:
        seen.add(mem)
    return seen.count


def degree_given_uniforms(x: np.ndarray, y: np.ndarray, link_u: np.ndarray, edge_u: np.ndarray,
                          scale: float) -> int:
    """Degree of ``v_1`` from explicit weights and uniforms.

    ``y[0]`` is ``Y_1``; ``link_u`` has shape ``(m,)`` and ``edge_u`` has shape
    ``(m, n - 1)``, one uniform per (attribute, vertex) pair.  Every pair keeps
    its uniform whatever the weights, which makes monotone couplings explicit.
    """
    linked = link_u < np.minimum(1.0, x * y[0] * scale)
    if not linked.any():
        return 0
    hits = edge_u[linked] < np.minimum(1.0, np.outer(x[linked], y[1:]) * scale)
    return int(np.count_nonzero(hits.any(axis=0)))


# ---- full-graph oracles ------------------------------------------------------


@dataclass(eq=False)
class BipartiteSample:
    """One realization of the bipartite graph behind an intersection graph.

    ``groups[i]`` lists the members of group ``i``: the vertices adjacent to
    attribute ``w_i`` (inhomogeneous) or the elements of ``D_i`` (passive).
    """

    model: str
    n: int
    m: int
    groups: list[np.ndarray]
    x: np.ndarray
    y: np.ndarray | None = None
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        if not validate:
            return
        size = self.n if self.model == "inhomogeneous" else self.m
        for g in self.groups:
            if len(g) and (g.min() < 0 or g.max() >= size):
                raise ConfigError("group member out of range")
            if len(np.unique(g)) != len(g):
                raise ConfigError("duplicate member within a group")


def _intersection_degrees(incidence: np.ndarray, size: int) -> np.ndarray:
    """Degrees of the graph joining two columns whenever some row contains both."""
    if incidence.shape[0] == 0:
        return np.zeros(size, dtype=np.int64)
    if size * size <= 4_000_000 and incidence.size <= 4_000_000:
        b = incidence.astype(np.float64)
        adj = (b.T @ b) > 0
        np.fill_diagonal(adj, False)
        return adj.sum(axis=1).astype(np.int64)
    b = sparse.csr_matrix(incidence.astype(np.int32))
    c = (b.T @ b).tocsr()
    c.setdiag(0)
    c.eliminate_zeros()
    return np.diff(c.indptr).astype(np.int64)


def generate_full_inhomogeneous(cfg: InhomogeneousConfig, rng: np.random.Generator) -> tuple[BipartiteSample, np.ndarray]:
    """Materialize all ``n m`` edge indicators; return the bipartite graph and every vertex degree."""
    if cfg.n * cfg.m > ORACLE_MAX_CELLS:
        raise ConfigError(f"oracle size guard: n*m = {cfg.n * cfg.m} > {ORACLE_MAX_CELLS}")
    x = np.asarray(cfg.p1.sample(rng, cfg.m), dtype=float)
    y = np.asarray(cfg.p2.sample(rng, cfg.n), dtype=float)
    u = rng.random((cfg.m, cfg.n))
    b = u < np.minimum(1.0, np.outer(x, y) * cfg.edge_scale)
    sample = BipartiteSample("inhomogeneous", cfg.n, cfg.m, [np.flatnonzero(r) for r in b], x, y, validate=False)
    return sample, _intersection_degrees(b, cfg.n)


def generate_full_passive(cfg: PassiveConfig, rng: np.random.Generator) -> tuple[BipartiteSample, np.ndarray]:
    """Materialize ``D_1..D_n``; return them and every degree of the graph on ``W``."""
    if cfg.n * cfg.m > ORACLE_MAX_CELLS:
        raise ConfigError(f"oracle size guard: n*m = {cfg.n * cfg.m} > {ORACLE_MAX_CELLS}")
    sizes = np.asarray(cfg.p.sample(rng, cfg.n), dtype=np.int64)
    if int(sizes.max()) > cfg.m:
        raise ConfigError(f"drew set size {int(sizes.max())} > m = {cfg.m} from {cfg.p}")
    inc = np.zeros((cfg.n, cfg.m), dtype=bool)
    groups = []
    for i, k in enumerate(sizes):
        d = rng.choice(cfg.m, size=int(k), replace=False)
        inc[i, d] = True
        groups.append(np.sort(d))
    sample = BipartiteSample("passive", cfg.n, cfg.m, groups, sizes.astype(float), validate=False)
    return sample, _intersection_degrees(inc, cfg.m)


# ---- batches ----------------------------------------------------------------


@dataclass(eq=False)
class DegreeBatch:
    """``degrees[r]`` is the degree of the first vertex in replication ``r``."""

    degrees: np.ndarray
    model: str
    config: dict
    seed: int
    reps: int = field(init=False)

    def __post_init__(self):
        self.degrees = np.asarray(self.degrees, dtype=np.int64)
        self.reps = len(self.degrees)

    def csv_bytes(self) -> bytes:
        lines = ["replication,degree"]
        lines += [f"{i},{d}" for i, d in enumerate(self.degrees.tolist())]
        return ("\n".join(lines) + "\n").encode()

    def to_csv(self, path: str | Path, extra: dict | None = None) -> Path:
        """Write ``replication,degree`` rows and a JSON sidecar next to them."""
        path = Path(path)
        data = self.csv_bytes()
        path.write_bytes(data)
        meta = {
            "model": self.model,
            "config": self.config,
            "seed": self.seed,
            "replications": self.reps,
            "content_hash": git_blob_hash(data),
        }
        if extra:
            meta.update(extra)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> DegreeBatch:
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        data = path.read_bytes()
        if git_blob_hash(data) != meta["content_hash"]:
            raise ConfigError(f"{path}: content hash does not match its sidecar")
        rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
        return cls(rows[:, 1], meta["model"], meta["config"], meta["seed"])


def git_blob_hash(data: bytes) -> str:
    """Content hash computed the way git hashes a blob."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _fast_chunk(cfg, seed: int, start: int, stop: int) -> np.ndarray:
    if isinstance(cfg, InhomogeneousConfig):
        sampler, size = sample_degree_inhomogeneous, cfg.n
    else:
        sampler, size = sample_degree_passive, cfg.m
    scratch = Membership(size)
    out = np.empty(stop - start, dtype=np.int64)
    for k, r in enumerate(range(start, stop)):
        out[k] = sampler(cfg, replication_rng(seed, r), scratch)
    return out


def _oracle_chunk(cfg, seed: int, start: int, stop: int, vertices: tuple[int, ...]) -> np.ndarray:
    gen = generate_full_inhomogeneous if isinstance(cfg, InhomogeneousConfig) else generate_full_passive
    out = np.empty((stop - start, len(vertices)), dtype=np.int64)
    idx = list(vertices)
    for k, r in enumerate(range(start, stop)):
        _, deg = gen(cfg, replication_rng(seed, r))
        out[k] = deg[idx]
    return out


def run_replications(fn, cfg, reps: int, seed: int, threads: int = 1, *args) -> np.ndarray:
    """Evaluate ``fn(cfg, seed, start, stop, *args)`` over replication chunks and concatenate.

    Results depend only on ``(cfg, seed, reps)``: each replication uses its own
    stream, and chunks are reassembled in replication order.
    """
    if reps < 1:
        raise ConfigError(f"replication count must be >= 1, got {reps}")
    threads = max(1, int(threads))
    if threads == 1:
        return fn(cfg, seed, 0, reps, *args)
    bounds = chunk_bounds(reps, 4 * threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(fn, *zip(*[(cfg, seed, a, b, *args) for a, b in bounds])))
    return np.concatenate(parts)


def simulate_degrees(cfg, reps: int, seed: int, threads: int = 1) -> DegreeBatch:
    """Degrees of the first vertex over ``reps`` independent graphs (fast sampler)."""
    deg = run_replications(_fast_chunk, cfg, reps, seed, threads)
    return DegreeBatch(deg, cfg.model, cfg.snapshot(), int(seed))


def simulate_oracle_degrees(cfg, reps: int, seed: int, vertices=(0,), threads: int = 1) -> np.ndarray:
    """Degrees of the given vertices over ``reps`` fully materialized graphs; shape ``(reps, len(vertices))``."""
    return run_replications(_oracle_chunk, cfg, reps, seed, threads, tuple(vertices))
