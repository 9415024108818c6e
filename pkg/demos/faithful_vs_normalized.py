"""Why secrets are drawn in normalized mode.

Faithful sampling draws each W-part member independently inside its
profile.  Two members with the same profile always cross-commute, and so do
products of members taken from two parts.  Sums across parts need not once
r >= 4, and with two parts per secret the handshake then stops agreeing.
Normalized mode ties every value vector to one public direction, so both
identities hold by construction.

    python3 demos/faithful_vs_normalized.py [trials]
"""

import sys

import numpy as np

from skewdh.field import GF
from skewdh.skew import Twist, conjugacy_class
from skewdh.tset import FAITHFUL, NORMALIZED, sum_product_identity_experiment

CONFIGS = [(2, 2, 1, 0, 1), (3, 2, 1, 0, 1), (2, 4, 2, 0, 1), (2, 3, 1, 0, 1)]


def main(trials=500):
    print(f"{'q':>3} {'r':>3}  {'mode':<10} {'sum viol.':>10} {'prod viol.':>10}")
    for p, m, s, beta, a in CONFIGS:
        F = GF(p, m)
        ctx = conjugacy_class(Twist(F, s, F(beta)), F(a))
        for mode in (FAITHFUL, NORMALIZED):
            rep = sum_product_identity_experiment(ctx, mode, trials, np.random.default_rng(ctx.r))
            print(f"{F.q:>3} {ctx.r:>3}  {mode:<10} {rep.sum_violations:>10} {rep.product_violations:>10}")
            if rep.first_sum_counterexample and mode == FAITHFUL and ctx.r == 4:
                cx = rep.first_sum_counterexample
                print(f"          first sum counterexample at positions ({cx['i']}, {cx['l']}): P={cx['P']} R={cx['R']} Q={cx['Q']} S={cx['S']}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 500)
