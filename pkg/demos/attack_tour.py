"""Run every game with both built-in adversaries and compare with what theory predicts.

Brute force inverts the action exhaustively, so at toy sizes it wins the
search games outright, and its distinguishing advantage is capped only by
the chance 1/r that the random orbit key equals the real one.

    python3 demos/attack_tour.py [trials]
"""

import sys
import warnings

import numpy as np

from skewdh.exceptions import GuardError
from skewdh.games import (
    AmBruteForce,
    AmCoinFlip,
    AmConfig,
    BruteForce,
    CoinFlip,
    GameConfig,
    cgsap_game,
    dgsap_game,
    reduction_consistency,
    sap_game,
    sk_experiment,
)
from skewdh.tset import DegenerateDirectionWarning
from skewdh.wire import gen_params


def row(rep, expect=None):
    tail = f"   theory {expect:.3f}" if expect is not None else ""
    print(f"  {rep.game:<7} {rep.adversary:<12} {rep.estimate:+.3f}  [{rep.ci_lo:+.3f}, {rep.ci_hi:+.3f}]{tail}")


def tour(params, trials):
    r = params.r
    print(f"\nq = {params.field.q}, r = {r}, trials = {trials}")
    cfg = GameConfig(params, trials, seed=1)
    brute = BruteForce(params)
    row(sap_game(cfg, brute), 1 - 1 / r)
    row(cgsap_game(cfg, brute), 1 - 1 / r)
    row(dgsap_game(cfg, brute), 1 - 1 / r)
    for game in (sap_game, cgsap_game, dgsap_game):
        row(game(cfg, CoinFlip()), 0.0)
    eps = 0.5 - 0.5 / r
    row(sk_experiment(params, AmConfig(l=2, seed=1), AmBruteForce(params), trials), eps)
    row(sk_experiment(params, AmConfig(l=2, seed=1), AmCoinFlip(), trials), 0.0)
    for l in (1, 2, 4):
        rec = reduction_consistency(cfg, AmConfig(l=l), AmBruteForce(params))
        lo, hi = rec["reduction_excess"][1:]
        print(f"  reduction l={l}: excess [{lo:.3f}, {hi:.3f}] vs eps/l = {eps / l:.3f}  consistent={rec['consistent']}")


def main(trials=1000):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDirectionWarning)
        small = [
            gen_params(2, 2, 1, 0, rng=np.random.default_rng(1)),
            gen_params(2, 4, 2, 0, n_parts=2, rng=np.random.default_rng(1)),
        ]
    for params in small:
        tour(params, trials)
    big = gen_params(2, 16, 8, 0, r_max=300, rng=np.random.default_rng(1))
    try:
        BruteForce(big)
    except GuardError as exc:
        print(f"\nq = 2^16: {exc}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 1000)
