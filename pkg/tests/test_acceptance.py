"""The twelve acceptance criteria, each at its stated size and tolerance.

Every criterion records a PASS/FAIL line that is printed in the terminal
summary.  Run alone with ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import statistics
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from conftest import criterion
from skewdh.exceptions import DegenerateEncryption, DegenerateSession
from skewdh.field import GF
from skewdh.games import (
    AmBruteForce,
    AmConfig,
    BruteForce,
    CoinFlip,
    GameConfig,
    cgsap_game,
    dgsap_game,
    reduction_consistency,
    sap_game,
)
from skewdh.pke import decrypt, encrypt, keygen
from skewdh.protocol import finalize, handshake, initiate, respond
from skewdh.skew import PointFunction, SkewPolynomial, Twist, conjugacy_class, find_left_distrib_counterexample, poly_to_fn, psi, skew_poly_mul, skew_product
from skewdh.tset import (
    FAITHFUL,
    NORMALIZED,
    DegenerateDirectionWarning,
    pair_list,
    part_from_direction,
    random_part,
    sum_product_identity_experiment,
    t_params_gen,
    t_sample,
    w_sample,
    w_sample_faithful,
)
from skewdh.wire import gen_params, params_from_dict

from test_protocol import random_params
from test_wire import GOLDEN, pair_run

# --------------------------------------------------------------------------------------
# Independent oracles: closed forms written out here, not taken from the library.


def phi_oracle(tw, c, b):
    # sigma(c) b c^-1 + beta (sigma(c) - c) c^-1 collapses to c^(p^s - 1)(b + beta) - beta
    return c ** (tw.field.p ** tw.s - 1) * (b + tw.beta) - tw.beta


def product_oracle(tw, f, g):
    F = tw.field
    return tuple((f.table[phi_oracle(tw, gx, x).value] * gx) if gx else F.zero for x, gx in zip(F.elements(), g.table))


def eval_oracle(tw, coeffs, b):
    """Evaluate sum c_k X^k at b through the norms N_0 = 1, N_(k+1) = sigma(N_k) b + delta(N_k)."""
    F = tw.field
    e = F.p ** tw.s
    total, n = F.zero, F.one
    for k, c in enumerate(coeffs):
        if k:
            sn = n ** e
            n = sn * b + tw.beta * (sn - n)
        total = total + c * n
    return total


def ore_mul_oracle(tw, f, g):
    """Coefficient lists; X c = sigma(c) X + delta(c) applied one X at a time."""
    F = tw.field
    e = F.p ** tw.s
    out = [F.zero] * (len(f) + len(g))
    for i, a in enumerate(f):
        # X^i * g as a coefficient list
        h = list(g)
        for _ in range(i):
            nh = [F.zero] * (len(h) + 1)
            for k, c in enumerate(h):
                nh[k + 1] = nh[k + 1] + c ** e
                nh[k] = nh[k] + tw.beta * (c ** e - c)
            h = nh
        for k, c in enumerate(h):
            out[k] = out[k] + a * c
    return out


def params_for(p, m, s, beta, a, n_parts, seed=0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDirectionWarning)
        return random_params(p, m, s, beta, a, n_parts=n_parts, seed=seed)


# --------------------------------------------------------------------------------------


def test_c01_key_agreement_exhaustive():
    with criterion(1, "key agreement, all c0 pairs at q = 4, 8, 9, n_parts 1 and 2", budget=10) as notes:
        ran = aborted = 0
        for (p, m), n_parts in itertools.product(((2, 2), (2, 3), (3, 2)), (1, 2)):
            params = params_for(p, m, 1, 0, 1, n_parts, seed=p * m + n_parts)
            F = params.field
            rng = np.random.default_rng([p, m, n_parts])
            for c0_p, c0_q in itertools.product(F.nonzero_elements(), repeat=2):
                inst_i, m1 = initiate(params, "i", "j", bytes(16), rng, c0=c0_p)
                try:
                    inst_j, m2 = respond(params, "j", m1, rng, c0=c0_q)
                except DegenerateSession:
                    aborted += 1
                    continue
                k_i = finalize(params, inst_i, m2)
                assert k_i == inst_j.sk, f"q={F.q} c0=({c0_p!r}, {c0_q!r})"
                ran += 1
        assert ran > 0
        notes.append(f"{ran} agreed, 0 mismatched, {aborted} degenerate aborts")


def test_c02_near_ring_laws():
    with criterion(2, "near-ring laws on 500 random triples at q = 4 and 8", budget=5) as notes:
        checked = 0
        for F, beta in ((GF(2, 2), 1), (GF(2, 3), 2)):
            tw = Twist(F, 1, F(beta))
            unit = PointFunction.const(F, F.one)
            rng = np.random.default_rng(F.q)
            for _ in range(500):
                f, g, h = (PointFunction.from_values(F, rng.integers(0, F.q, size=F.q)) for _ in range(3))
                fg = PointFunction(F, product_oracle(tw, f, g))
                gh = PointFunction(F, product_oracle(tw, g, h))
                assert skew_product(tw, f, unit).table == product_oracle(tw, f, unit) == f.table
                assert skew_product(tw, unit, f).table == product_oracle(tw, unit, f) == f.table
                lhs = product_oracle(tw, f + g, h)
                rhs = tuple(a + b for a, b in zip(product_oracle(tw, f, h), product_oracle(tw, g, h)))
                assert lhs == rhs == skew_product(tw, f + g, h).table
                assert product_oracle(tw, fg, h) == product_oracle(tw, f, gh) == skew_product(tw, skew_product(tw, f, g), h).table
                checked += 1
        notes.append(f"{checked} triples, 0 violations")


def test_c03_left_distributivity_fails():
    with criterion(3, "left distributivity fails at q = 4 (s=1, beta=0)", budget=1) as notes:
        F = GF(2, 2)
        tw = Twist(F, 1, F.zero)
        w = find_left_distrib_counterexample(tw)
        assert w is not None
        lhs = product_oracle(tw, w.f, w.g + w.h)[w.x.value]
        rhs = product_oracle(tw, w.f, w.g)[w.x.value] + product_oracle(tw, w.f, w.h)[w.x.value]
        assert lhs == w.lhs and rhs == w.rhs and lhs != rhs
        # hand witness: f = 1 on {1, t}, g = 1, h = t, evaluated at x = 1
        one, t = F.one, F.t
        f = PointFunction.from_mapping(F, {one: one, t: one})
        g, h = PointFunction.const(F, one), PointFunction.const(F, t)
        assert product_oracle(tw, f, g + h)[one.value] == F.zero
        assert product_oracle(tw, f, g)[one.value] + product_oracle(tw, f, h)[one.value] == t + one
        notes.append(f"search witness at x={w.x!r}: {w.lhs!r} vs {w.rhs!r}; hand witness 0 vs t+1")


def test_c04_psi_action_law():
    with criterion(4, "psi action law: all nowhere-zero pairs at q = 4, 10^4 random pairs at q = 16", budget=30) as notes:
        checks = 0
        F = GF(2, 2)
        units = [u.value for u in F.nonzero_elements()]
        fns = [PointFunction.from_values(F, vals) for vals in itertools.product(units, repeat=F.q)]
        for beta in (0, 1):
            tw = Twist(F, 1, F(beta))
            for f, g in itertools.product(fns, repeat=2):
                fg = product_oracle(tw, f, g)
                for b in F.elements():
                    inner = phi_oracle(tw, g(b), b)
                    assert phi_oracle(tw, fg[b.value], b) == phi_oracle(tw, f(inner), inner) == psi(tw, f, psi(tw, g, b))
                    checks += 1
        F16 = GF(2, 4)
        tw = Twist(F16, 2, F16.t)
        rng = np.random.default_rng(16)
        for _ in range(10_000):
            f, g = (PointFunction.from_values(F16, rng.integers(1, 16, size=16)) for _ in range(2))
            fg = product_oracle(tw, f, g)
            b = F16.random_element(rng)
            inner = phi_oracle(tw, g(b), b)
            assert phi_oracle(tw, fg[b.value], b) == phi_oracle(tw, f(inner), inner)
            assert psi(tw, PointFunction(F16, fg), b) == psi(tw, f, psi(tw, g, b))
            checks += 1
        notes.append(f"{checks} checks, 0 violations")


W_CONFIGS = {3: (2, 2, 1, 0, 1), 5: (2, 4, 2, 0, 1), 17: (2, 8, 4, 0, 1)}


def _w_oracle(F, elem, r):
    """Value vector and constraint products straight from the pair factors, in integers."""
    mul = F._mul
    fac = {}
    for x in elem.factors:
        fac[(x.i, x.j)] = fac[(x.j, x.i)] = x
    values = []
    for k in range(r):
        acc = 1
        for x in elem.factors:
            acc = mul(acc, (x.dist_i if k == x.i else x.dist_j if k == x.j else x.generic).value)
        values.append(acc)

    def dist(row, k):
        x = fac[(row, k)]
        return (x.dist_i if x.i == row else x.dist_j).value

    u, v = [], []
    for i, l in pair_list(r):
        pu = pv = 1
        for k in range(r):
            if k != i:
                pu = mul(pu, dist(i, k))
            if k != l:
                pv = mul(pv, dist(l, k))
            if k not in (i, l):
                pu = mul(pu, fac[(l, k)].generic.value)
                pv = mul(pv, fac[(i, k)].generic.value)
        u.append(pu)
        v.append(pv)
    return values, u, v


def test_c05_w_set_algebra():
    with criterion(5, "W-set constraints and ratio law, 10^3 samples at r = 3, 5, 17") as notes:
        total = 0
        for r, (p, m, s, beta, a) in W_CONFIGS.items():
            F = GF(p, m)
            ctx = conjugacy_class(Twist(F, s, F(beta)), F(a))
            assert ctx.r == r
            rng = np.random.default_rng(r)
            parts = [random_part(F, r, rng) for _ in range(4)]
            for n in range(1000):
                part = parts[n % 4]
                elem = (w_sample if n % 2 else w_sample_faithful)(part, rng)
                values, u, v = _w_oracle(F, elem, r)
                assert [x.value for x in elem.values] == values
                assert u == [x.value for x in part.profile.u] and v == [x.value for x in part.profile.v]
                for k, (i, l) in enumerate(pair_list(r)):
                    assert F._mul(values[i], v[k]) == F._mul(values[l], u[k])
                total += 1
            # symmetric profile: a constant direction makes every member constant
            for _ in range(20):
                c = F.random_nonzero(rng)
                part = part_from_direction(F, [c] * r, [F.random_nonzero(rng) for _ in range(r * (r - 1) // 2)])
                assert part.profile.u == part.profile.v
                for sampler in (w_sample, w_sample_faithful):
                    assert len(set(sampler(part, rng).values)) == 1
        notes.append(f"{total} samples, 0 violations")


def test_c06_cross_commutation():
    with criterion(6, "cross-commutation on 10^4 normalized pairs per configuration; faithful sum identity at q = 4") as notes:
        for r, (p, m, s, beta, a) in W_CONFIGS.items():
            F = GF(p, m)
            ctx = conjugacy_class(Twist(F, s, F(beta)), F(a))
            rng = np.random.default_rng(100 + r)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateDirectionWarning)
                tp = t_params_gen(ctx, 2, 1, rng)
            pairs = pair_list(r)
            for _ in range(10_000):
                P, Q = t_sample(tp, rng), t_sample(tp, rng)
                x, y = [e.value for e in P.values], [e.value for e in Q.values]
                for i, l in pairs:
                    assert F._mul(x[i], y[l]) == F._mul(x[l], y[i]), f"r={r} at ({i}, {l})"
        ctx4 = conjugacy_class(Twist(GF(2, 2), 1, GF(2, 2).zero), GF(2, 2).one)
        faithful = sum_product_identity_experiment(ctx4, FAITHFUL, 2000, np.random.default_rng(6))
        normalized = sum_product_identity_experiment(ctx4, NORMALIZED, 2000, np.random.default_rng(6))
        assert normalized.sum_violations == normalized.product_violations == 0
        notes.append(
            f"0 violations at r=3,5,17; faithful q=4 sum identity: {faithful.sum_violations}/{faithful.trials} violations, "
            f"product identity: {faithful.product_violations}/{faithful.trials}"
        )
        print(json.dumps(faithful.as_dict(), sort_keys=True))


def test_c07_evaluation_bridge():
    with criterion(7, "evaluation bridge, all degree <= 2 pairs at q = 4") as notes:
        F = GF(2, 2)
        n = 0
        for beta in (0, 1):
            tw = Twist(F, 1, F(beta))
            coeff_lists = [[F(c) for c in cs] for cs in itertools.product(range(4), repeat=3)]
            table = {tuple(c.value for c in cs): [eval_oracle(tw, cs, b) for b in F.elements()] for cs in coeff_lists}
            for f, g in itertools.product(coeff_lists, repeat=2):
                fg = ore_mul_oracle(tw, f, g)
                want = product_oracle(
                    tw, PointFunction(F, tuple(table[tuple(c.value for c in f)])), PointFunction(F, tuple(table[tuple(c.value for c in g)]))
                )
                assert tuple(eval_oracle(tw, fg, b) for b in F.elements()) == want
                lib = poly_to_fn(tw, skew_poly_mul(tw, SkewPolynomial.of(F, f), SkewPolynomial.of(F, g)))
                assert lib.table == want
                n += 1
        notes.append(f"{n} products, 0 violations")


def test_c08_game_statistics():
    with criterion(8, "game statistics at q = 4, 2000 trials", budget=60) as notes:
        params = params_for(2, 2, 1, 0, 1, 1, seed=20)
        cfg = GameConfig(params, 2000, 808)
        for game in (sap_game, cgsap_game, dgsap_game):
            rep = game(cfg, CoinFlip())
            assert rep.ci_lo <= 0 <= rep.ci_hi, f"{rep.game}: coin flip interval [{rep.ci_lo}, {rep.ci_hi}]"
        sap = sap_game(cfg, BruteForce(params))
        assert sap.rate == 1.0 and sap.wins == 2000
        dg = dgsap_game(cfg, BruteForce(params))
        assert dg.estimate > 0.5
        notes.append(f"brute-force SAP rate {sap.rate}, DGSAP advantage {dg.estimate:.3f} (1 - 1/r = {1 - 1 / params.r:.3f})")


def test_c09_reduction_consistency():
    with criterion(9, "reduction consistency at q = 4, 8, l = 1, 2, 4, 5000 trials") as notes:
        for q, params in ((4, params_for(2, 2, 1, 0, 1, 1, seed=20)), (8, params_for(2, 3, 1, 0, 1, 2, seed=21))):
            for l in (1, 2, 4):
                rec = reduction_consistency(GameConfig(params, 5000, 900 + 10 * q + l), AmConfig(l=l), AmBruteForce(params))
                assert rec["consistent"], rec
                notes.append(f"q={q} l={l}: {rec['reduction_excess'][0]:.3f} vs eps/l {rec['sk_eps_over_l'][0]:.3f}")


def test_c10_pke_round_trip():
    with criterion(10, "PKE round trip for every message at q = 4, 8, 9") as notes:
        ok = skipped = 0
        for p, m in ((2, 2), (2, 3), (3, 2)):
            params = params_for(p, m, 1, 0, 1, 2, seed=10 * p + m)
            F = params.field
            rng = np.random.default_rng(F.q)
            for _ in range(3):
                kp = keygen(params, rng)
                for msg, c0 in itertools.product(F.elements(), F.nonzero_elements()):
                    try:
                        ct = encrypt(params, kp.public, msg, rng, c0=c0)
                    except DegenerateEncryption:
                        skipped += 1
                        continue
                    assert decrypt(params, kp, ct) == msg
                    ok += 1
        notes.append(f"{ok} cycles recovered m, {skipped} degenerate skipped")


def test_c11_performance():
    with criterion(11, "handshake < 100 ms and gen-params < 2 s at q = 2^8, r = 17") as notes:
        t0 = time.perf_counter()
        params = gen_params(2, 8, 4, 0, n_parts=2, r_min=17, r_max=17, rng=np.random.default_rng(11))
        gen_time = time.perf_counter() - t0
        assert params.r == 17 and gen_time < 2
        rng = np.random.default_rng(12)
        times = []
        for _ in range(21):
            t0 = time.perf_counter()
            try:
                handshake(params, rng)
            except DegenerateSession:
                pass
            times.append(time.perf_counter() - t0)
        med = statistics.median(times)
        assert med < 0.1
        notes.append(f"gen-params {gen_time * 1000:.0f} ms, handshake median {med * 1000:.1f} ms, max {max(times) * 1000:.1f} ms")


def test_c12_determinism_and_wire(tmp_path):
    with criterion(12, "seeded CLI runs byte-identical; golden wire transcript replays") as notes:
        pfile = tmp_path / "p.json"

        def cli(*argv):
            return subprocess.run([sys.executable, "-m", "skewdh.cli", *map(str, argv)], capture_output=True, timeout=120, check=True).stdout

        runs = [
            ("gen-params", "--p", 2, "--m", 4, "--s", 2, "--parts", 2, "--seed", 12),
            ("demo", "--params", pfile, "--seed", 12, "--runs", 1),
            ("demo", "--params", pfile, "--seed", 12, "--runs", 50),
            ("games", "--params", pfile, "--game", "cgsap", "--trials", 200, "--seed", 12),
        ]
        pfile.write_bytes(cli(*runs[0]))
        for argv in runs:
            assert cli(*argv) == cli(*argv), argv
        gold = json.loads(GOLDEN.read_text())
        params = params_from_dict(gold["params"])
        i, r = pair_run(params, params, gold["initiator_seed"], gold["responder_seed"], bytes.fromhex(gold["sid"]))
        assert [f.hex() for f in i.sent] == gold["initiator_frames"]
        assert [f.hex() for f in r.sent] == gold["responder_frames"]
        assert i.instance.sk.encode().hex() == gold["key"]
        notes.append(f"{len(runs)} commands repeated identically; {len(i.sent) + len(r.sent)} golden frames matched")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
