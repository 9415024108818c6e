"""Walk one key agreement over F_4 step by step, then encrypt a message.

    python3 demos/handshake_walkthrough.py [seed]
"""

import sys

import numpy as np

from skewdh.exceptions import DegenerateSession
from skewdh.field import GF
from skewdh.pke import decrypt, encrypt, keygen
from skewdh.protocol import DomainParams, finalize, initiate, power_sum, respond
from skewdh.skew import Twist, conjugacy_class, orbit_partition
from skewdh.tset import t_params_from_directions
from skewdh.wire import key_digest


def show_orbits(tw):
    print(f"twist: sigma = x^{tw.sigma_exponent}, beta = {tw.beta!r}")
    for ctx in orbit_partition(tw):
        print(f"  orbit of {ctx.base!r:>5}: {[repr(x) for x in ctx.orbit]}")


def main(seed=4):
    F = GF(2, 2)
    one, t = F.one, F.t
    tw = Twist(F, 1, F.zero)
    show_orbits(tw)

    # secrets are c0 * (1, t, t+1) on the orbit (1, t, t+1); d = 4 keeps the power sum nonzero on F_4^*
    ctx = conjugacy_class(tw, one)
    params = DomainParams.from_tparams(t_params_from_directions(ctx, [[one, t, t + one]], d=4))
    print(f"\nbase a = {params.a!r}, r = {params.r}, d = {params.d}")

    rng = np.random.default_rng(seed)
    sid = rng.bytes(16)
    alice, m1 = initiate(params, "alice", "bob", sid, rng)
    print(f"alice: c0 = {alice.secret.c0!r}, pk = {m1.pk!r}")
    print(f"  frame {m1.encode().hex()}")
    try:
        bob, m2 = respond(params, "bob", m1, rng)
    except DegenerateSession as exc:
        print(f"bob aborts: {exc}  (try another seed)")
        return
    print(f"bob:   pk = {m2.pk!r}, mask sum S = {power_sum(params, m1.pk, m2.pk)!r}")
    k_alice = finalize(params, alice, m2)
    print(f"alice key {k_alice!r}, bob key {bob.sk!r}, digest {key_digest(k_alice)[:16]}...")
    assert k_alice == bob.sk
    print(f"secrets erased: alice {alice.secret is None}, bob {bob.secret is None}")

    print("\nencryption with the same parameters")
    kp = keygen(params, rng)
    for m in F.elements():
        ct = encrypt(params, kp.public, m, rng)
        print(f"  m = {m!r:>5} -> (c1, c2) = ({ct.c1!r}, {ct.c2!r}) -> {decrypt(params, kp, ct)!r}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4)
