import numpy as np
import pytest

from rigdeg.errors import ConfigError
from rigdeg.models import (
    BipartiteSample,
    DegreeBatch,
    InhomogeneousConfig,
    PassiveConfig,
    degree_given_uniforms,
    generate_full_inhomogeneous,
    generate_full_passive,
    sample_degree_inhomogeneous,
    sample_degree_passive,
    simulate_degrees,
    simulate_oracle_degrees,
)
from rigdeg.rng import chunk_bounds, replication_rng
from rigdeg.stats import compare_two_sample, empirical_pmf

from oracles import passive_enumeration


def rngs(seed, count):
    return (replication_rng(seed, r) for r in range(count))


class TestInhomogeneousSampler:
    def test_no_attribute_weight(self):
        cfg = InhomogeneousConfig(50, 40, "constant:0", "exponential:1")
        assert all(sample_degree_inhomogeneous(cfg, g) == 0 for g in rngs(1, 200))

    def test_clamped_complete_graph(self):
        cfg = InhomogeneousConfig(4, 4, "constant:1e9", "constant:1e9")
        assert all(sample_degree_inhomogeneous(cfg, g) == 3 for g in rngs(1, 200))

    def test_single_vertex(self):
        cfg = InhomogeneousConfig(1, 5, "constant:1e9", "constant:1")
        assert sample_degree_inhomogeneous(cfg, replication_rng(0, 0)) == 0

    def test_degree_bounds(self):
        cfg = InhomogeneousConfig(30, 20, "pareto:1.2,2", "exponential:0.5")
        d = simulate_degrees(cfg, 3000, 4).degrees
        assert d.min() >= 0 and d.max() <= cfg.n - 1

    def test_monotone_in_attribute_weight(self):
        rng = np.random.default_rng(9)
        n, m = 12, 9
        scale = 1 / np.sqrt(n * m)
        for _ in range(200):
            y = rng.exponential(1.0, n)
            link_u, edge_u = rng.random(m), rng.random((m, n - 1))
            degrees = [degree_given_uniforms(np.full(m, c), y, link_u, edge_u, scale) for c in (0.1, 0.5, 1, 2, 5, 40)]
            assert degrees == sorted(degrees)

    def test_uniform_coupling_matches_definition(self):
        """The explicit-uniform degree has the same law as the sampler."""
        n, m = 5, 4
        cfg = InhomogeneousConfig(n, m, "constant:2", "constant:1.5")
        rng = np.random.default_rng(3)
        scale = cfg.edge_scale
        ref = [degree_given_uniforms(np.full(m, 2.0), np.full(n, 1.5), rng.random(m), rng.random((m, n - 1)), scale)
               for _ in range(40000)]
        fast = simulate_degrees(cfg, 40000, 5).degrees
        assert compare_two_sample(empirical_pmf(ref), empirical_pmf(fast), 0.001).passed


class TestPassiveSampler:
    @pytest.mark.parametrize("size", [0, 1])
    def test_tiny_sets(self, size):
        cfg = PassiveConfig(20, 10, f"constant:{size}")
        assert all(sample_degree_passive(cfg, g) == 0 for g in rngs(2, 100))

    def test_full_sets(self):
        cfg = PassiveConfig(3, 7, "constant:7")
        assert all(sample_degree_passive(cfg, g) == 6 for g in rngs(2, 100))

    def test_two_set(self):
        cfg = PassiveConfig(1, 2, "constant:2")
        assert all(sample_degree_passive(cfg, g) == 1 for g in rngs(2, 100))

    def test_support_beyond_m_rejected(self):
        with pytest.raises(ConfigError):
            PassiveConfig(5, 3, "constant:4")
        cfg = PassiveConfig(50, 3, "poisson:5")
        with pytest.raises(ConfigError):
            for g in rngs(1, 50):
                sample_degree_passive(cfg, g)

    def test_non_integer_sizes_rejected(self):
        with pytest.raises(ConfigError):
            PassiveConfig(5, 3, "exponential:1")

    def test_capped_law(self):
        cfg = PassiveConfig.capped(10, 20, "zeta:2.5")
        assert cfg.p.support()[1] == 20


class TestOracles:
    def test_no_attributes(self):
        cfg = InhomogeneousConfig(6, 0, "constant:1", "constant:1")
        sample, deg = generate_full_inhomogeneous(cfg, replication_rng(0, 0))
        assert np.array_equal(deg, np.zeros(6)) and sample.groups == []

    def test_forced_complete(self):
        cfg = InhomogeneousConfig(2, 1, "constant:1e9", "constant:1e9")
        _, deg = generate_full_inhomogeneous(cfg, replication_rng(0, 0))
        assert deg.tolist() == [1, 1]

    def test_passive_corner_cases(self):
        _, deg = generate_full_passive(PassiveConfig(4, 5, "constant:1"), replication_rng(0, 0))
        assert deg.tolist() == [0] * 5
        _, deg = generate_full_passive(PassiveConfig(2, 5, "constant:5"), replication_rng(0, 0))
        assert deg.tolist() == [4] * 5

    def test_size_guard(self):
        with pytest.raises(ConfigError):
            generate_full_inhomogeneous(InhomogeneousConfig(10**4, 10**4, "constant:1", "constant:1"), replication_rng(0, 0))
        with pytest.raises(ConfigError):
            generate_full_passive(PassiveConfig(10**4, 10**4, "constant:1"), replication_rng(0, 0))

    def test_sparse_path_agrees_with_dense(self):
        # 3000 vertices pushes the intersection step onto sparse matrices
        cfg = InhomogeneousConfig(3000, 40, "constant:5", "constant:1")
        sample, deg = generate_full_inhomogeneous(cfg, replication_rng(7, 0))
        nbrs = [set() for _ in range(cfg.n)]
        for g in sample.groups:
            for v in g:
                nbrs[v].update(g)
        assert deg.tolist() == [len(s - {v}) for v, s in enumerate(nbrs)]
        BipartiteSample(sample.model, sample.n, sample.m, sample.groups, sample.x, sample.y)

    def test_passive_groups_are_valid_subsets(self):
        cfg = PassiveConfig(30, 12, "uniform-int:0,12")
        sample, _ = generate_full_passive(cfg, replication_rng(1, 0))
        BipartiteSample(sample.model, sample.n, sample.m, sample.groups, sample.x)
        assert [len(g) for g in sample.groups] == sample.x.astype(int).tolist()

    def test_bipartite_sample_invariants(self):
        with pytest.raises(ConfigError):
            BipartiteSample("passive", 2, 3, [np.array([0, 0])], np.array([2.0]))
        with pytest.raises(ConfigError):
            BipartiteSample("passive", 2, 3, [np.array([0, 3])], np.array([2.0]))

    def test_inhomogeneous_small_case_p0(self):
        cfg = InhomogeneousConfig(3, 3, "constant:1", "constant:1")
        reps = 100_000
        fast = simulate_degrees(cfg, reps, 11).degrees
        full = simulate_oracle_degrees(cfg, reps, 12)[:, 0]
        p1, p2 = np.mean(fast == 0), np.mean(full == 0)
        se = np.sqrt(p1 * (1 - p1) / reps + p2 * (1 - p2) / reps)
        assert abs(p1 - p2) <= 3 * se
        # attributes act independently: each is unlinked to v1, or linked with no other neighbour
        exact = (2 / 3 + (1 / 3) * (2 / 3) ** 2) ** 3
        assert abs(p1 - exact) <= 4 * np.sqrt(exact * (1 - exact) / reps)

    def test_passive_enumeration(self):
        exact = passive_enumeration(4, 2, 2)
        reps = 100_000
        for deg in (simulate_oracle_degrees(PassiveConfig(2, 4, "constant:2"), reps, 3)[:, 0],
                    simulate_degrees(PassiveConfig(2, 4, "constant:2"), reps, 4).degrees):
            emp = np.bincount(deg, minlength=4) / reps
            assert np.max(np.abs(np.cumsum(emp) - np.cumsum(exact))) <= np.sqrt(np.log(2 / 0.001) / (2 * reps))

    @pytest.mark.parametrize("cfg", [
        InhomogeneousConfig(8, 6, "exponential:1", "uniform-int:0,3"),
        InhomogeneousConfig(20, 30, "pareto:1.5,1", "constant:2"),
        PassiveConfig(6, 9, "uniform-int:0,5"),
        PassiveConfig.capped(40, 30, "zeta:2.2"),
    ], ids=["inh-exp", "inh-pareto", "pas-unif", "pas-zeta"])
    def test_marginal_equivalence(self, cfg):
        reps = 20_000
        fast = empirical_pmf(simulate_degrees(cfg, reps, 21).degrees)
        full = empirical_pmf(simulate_oracle_degrees(cfg, reps, 22)[:, 0])
        assert compare_two_sample(fast, full, 0.001).passed

    def test_passive_exchangeability(self):
        cfg = PassiveConfig(5, 8, "uniform-int:1,4")
        deg = simulate_oracle_degrees(cfg, 30_000, 5, vertices=(0, 1))
        assert compare_two_sample(empirical_pmf(deg[:, 0]), empirical_pmf(deg[:, 1]), 0.001).passed


class TestBatches:
    def test_determinism(self):
        cfg = InhomogeneousConfig(200, 100, "pareto:1.5,1", "constant:1")
        a = simulate_degrees(cfg, 300, 8).degrees
        b = simulate_degrees(cfg, 300, 8).degrees
        assert np.array_equal(a, b)
        assert not np.array_equal(a, simulate_degrees(cfg, 300, 9).degrees)

    def test_parallel_equals_serial(self):
        cfg = PassiveConfig.capped(100, 100, "zeta:2.5")
        serial = simulate_degrees(cfg, 400, 3, threads=1).degrees
        parallel = simulate_degrees(cfg, 400, 3, threads=2).degrees
        assert np.array_equal(serial, parallel)

    def test_prefix_stability(self):
        cfg = InhomogeneousConfig(50, 50, "exponential:1", "constant:1")
        assert np.array_equal(simulate_degrees(cfg, 100, 1).degrees, simulate_degrees(cfg, 250, 1).degrees[:100])

    def test_chunk_bounds(self):
        assert chunk_bounds(10, 3) == [(0, 3), (3, 7), (7, 10)]
        assert chunk_bounds(2, 8) == [(0, 1), (1, 2)]

    def test_csv_round_trip(self, tmp_path):
        cfg = InhomogeneousConfig(30, 30, "constant:1", "constant:1")
        batch = simulate_degrees(cfg, 50, 2)
        path = batch.to_csv(tmp_path / "d.csv")
        assert path.read_text().splitlines()[0] == "replication,degree"
        back = DegreeBatch.from_csv(path)
        assert np.array_equal(back.degrees, batch.degrees) and back.config == cfg.snapshot() and back.reps == 50

    def test_tampered_csv_detected(self, tmp_path):
        batch = simulate_degrees(PassiveConfig(5, 5, "constant:2"), 10, 2)
        path = batch.to_csv(tmp_path / "d.csv")
        path.write_text(path.read_text().replace("\n0,", "\n0,9", 1))
        with pytest.raises(ConfigError):
            DegreeBatch.from_csv(path)

    def test_reps_must_be_positive(self):
        with pytest.raises(ConfigError):
            simulate_degrees(PassiveConfig(5, 5, "constant:2"), 0, 1)
