"""Simulate the degree of a fixed vertex and compare it with the limit law.

    python3 demos/simulate_and_compare.py
"""

from rigdeg.distributions import limit_inhomogeneous, limit_passive, parse_spec
from rigdeg.models import InhomogeneousConfig, PassiveConfig, simulate_degrees
from rigdeg.stats import compare, empirical_pmf


def report(label, cfg, limit, reps=20_000, seed=1):
    rep = compare(empirical_pmf(simulate_degrees(cfg, reps, seed)), limit)
    print(f"{label:<40} ks={rep.ks:.4f}  band={rep.dkw_epsilon + rep.tail_mass:.4f}  {rep.verdict}")


def main():
    one = parse_spec("constant:1")
    gamma = parse_spec("gamma:2,1")
    report("inhomogeneous gamma/constant n=m=2000", InhomogeneousConfig(2000, 2000, gamma, one),
           limit_inhomogeneous(gamma, one, 1.0, min_support=2000).pmf_dstar)
    z = parse_spec("zeta:3.5")
    cfg = PassiveConfig.capped(2000, 4000, z)
    report("passive zeta(3.5) n=2000 m=4000", cfg, limit_passive(z, 2.0, 1e-6, min_support=4000).pmf_dstar)


if __name__ == "__main__":
    main()
