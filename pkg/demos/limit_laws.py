"""Print the first few probabilities of the limiting degree laws for a few weight choices.

The table mean is computed over the stored support only; for pareto(1.5)
attributes the true mean is infinite, so that figure just grows with the table.

    python3 demos/limit_laws.py
"""

import numpy as np

from rigdeg.distributions import limit_inhomogeneous, limit_passive, parse_spec


def show(label, pmf, k=8):
    dense = pmf.dense()
    mean = float(np.arange(len(dense)) @ dense)
    head = "  ".join(f"{pmf(r):.4f}" for r in range(k))
    print(f"{label:<44} table mean {mean:8.3f}  P(0..{k - 1}): {head}")


def main():
    one = parse_spec("constant:1")
    show("inhomogeneous, constant weights, beta=1", limit_inhomogeneous(one, one, 1.0).pmf_dstar)
    show("inhomogeneous, gamma(2,1) attributes, beta=4", limit_inhomogeneous(parse_spec("gamma:2,1"), one, 4.0).pmf_dstar)
    show("inhomogeneous, pareto(1.5) attributes", limit_inhomogeneous(parse_spec("pareto:1.5,1"), one, 1.0, 0.05).pmf_dstar)
    show("passive, sets of size 2, beta=1", limit_passive(parse_spec("constant:2"), 1.0).pmf_dstar)
    show("passive, zeta(3.5) set sizes, beta=2", limit_passive(parse_spec("zeta:3.5"), 2.0, 1e-6).pmf_dstar)


if __name__ == "__main__":
    main()
