"""Command-line front end: ``skewdh <command> ...``.

Exit codes: 0 success, 1 check failed or keys mismatched, 2 bad input
(parameter file, arguments, frames), 3 refused by a guard.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .exceptions import GuardError, NoSuitableOrbit, ParamFileError, ProtocolError, SkewDHError
from .field import GF, FieldElement, FieldParams, encode
from .games import (
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
from .pke import Ciphertext, PkeKeyPair, PkePublicKey, decrypt, encrypt, keygen
from .selftest import run_selftest
from .tset import TElement
from .wire import (
    connect,
    demo_run,
    dump_params,
    gen_params,
    key_digest,
    load_params,
    params_digest,
    serve,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


def resolve_seed(flag: int | None) -> int | None:
    """--seed wins; otherwise SKEWDH_SEED; otherwise None (fresh entropy)."""
    if flag is not None:
        return flag
    env = os.environ.get("SKEWDH_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise SystemExit(f"SKEWDH_SEED must be an integer, got {env!r}")
    return None


def make_rng(seed: int | None, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream] if seed is not None else None)


def parse_element(F: FieldParams, text: str) -> FieldElement:
    """An int encoding ("6") or ascending coefficients ("0,1,1")."""
    text = text.strip()
    if "," in text:
        return F([int(c) for c in text.split(",")])
    v = int(text, 0)
    if not 0 <= v < F.q:
        raise ValueError(f"{v} is outside [0, {F.q})")
    return F(v)


def _emit(line: str, out) -> None:
    out.write(line + "\n")


# ---------------------------------------------------------------------------
# Commands


def cmd_gen_params(args, out) -> int:
    seed = resolve_seed(args.seed)
    beta = parse_element(GF(args.p, args.m), args.beta)
    params = gen_params(
        args.p, args.m, args.s, beta, n_parts=args.parts, d=args.degree, r_min=args.r_min, r_max=args.r_max, rng=make_rng(seed), mode=args.mode,
    )
    text = dump_params(params)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit(json.dumps({"written": args.out, "r": params.r, "digest": params_digest(params).hex()}), out)
    else:
        out.write(text)
    return EXIT_OK


def cmd_demo(args, out) -> int:
    params = load_params(args.params)
    seed = resolve_seed(args.seed)
    mismatches = aborts = 0
    lines = []
    for run in range(args.runs):
        rec_i, rec_j = demo_run(params, make_rng(seed, run))
        if rec_i.abort or rec_j.abort:
            aborts += 1
        elif rec_i.key != rec_j.key:
            mismatches += 1
        if args.runs == 1 or args.verbose:
            lines += [rec_i.to_json(), rec_j.to_json()]
    for line in lines:
        _emit(line, out)
    if args.out:
        with open(args.out, "w") as fh:
            fh.writelines(line + "\n" for line in lines)
    if args.runs > 1:
        _emit(json.dumps({"runs": args.runs, "mismatches": mismatches, "aborts": aborts}, sort_keys=True), out)
    return EXIT_FAIL if mismatches else EXIT_OK


def _key_line(role: str, inst, insecure: bool) -> str:
    doc = {"role": role, "sid": inst.sid.hex(), "key_sha256": key_digest(inst.sk)}
    if insecure:
        doc["key"] = encode(inst.sk).hex()
    return json.dumps(doc, sort_keys=True)


def cmd_serve(args, out) -> int:
    params = load_params(args.params)
    seed = resolve_seed(args.seed)
    status = [EXIT_OK]

    def report(res):
        if isinstance(res, Exception):
            _emit(json.dumps({"role": "responder", "error": f"{type(res).__name__}: {res}"}), out)
            status[0] = EXIT_FAIL
        else:
            _emit(_key_line("responder", res.instance, args.insecure_print), out)
        out.flush()

    def ready(port):
        print(f"listening on {args.host}:{port}", file=sys.stderr, flush=True)

    serve(args.port, params, seed, args.id, once=args.once, host=args.host, on_result=report, ready=ready)
    return status[0]


def cmd_connect(args, out) -> int:
    params = load_params(args.params)
    seed = resolve_seed(args.seed)
    host, _, port = args.address.rpartition(":")
    sid = bytes.fromhex(args.sid) if args.sid else None
    if sid is not None and len(sid) != 16:
        raise ValueError("--sid must be 16 bytes of hex")
    res = connect(host or "127.0.0.1", int(port), params, make_rng(seed), args.id, args.peer, sid)
    _emit(_key_line("initiator", res.instance, args.insecure_print), out)
    return EXIT_OK


def cmd_games(args, out) -> int:
    params = load_params(args.params)
    seed = resolve_seed(args.seed)
    seed = 0 if seed is None else seed
    cfg = GameConfig(params, args.trials, seed, args.confidence)
    wanted = ["brute-force", "coin-flip"] if args.adversary == "all" else [args.adversary]
    game = args.game
    if game in ("sap", "cgsap", "dgsap"):
        run = {"sap": sap_game, "cgsap": cgsap_game, "dgsap": dgsap_game}[game]
        for name in wanted:
            adv = BruteForce(params) if name == "brute-force" else CoinFlip()
            _emit(run(cfg, adv).to_json(), out)
        return EXIT_OK
    am = AmConfig(l=args.l, seed=seed)
    for name in wanted:
        adv = AmBruteForce(params) if name == "brute-force" else AmCoinFlip()
        if game == "sk-am":
            _emit(sk_experiment(params, am, adv, args.trials, seed, args.confidence).to_json(), out)
        else:
            rec = reduction_consistency(cfg, am, adv)
            rec["adversary"] = name
            _emit(json.dumps(rec, sort_keys=True, separators=(",", ":")), out)
    return EXIT_OK


def _secret_to_json(P: TElement) -> dict:
    return {"c0": list(P.c0.coeffs), "values": [list(v.coeffs) for v in P.values]}


def cmd_pke(args, out) -> int:
    params = load_params(args.params)
    F = params.field
    digest = params_digest(params).hex()
    if args.pke_cmd == "keygen":
        kp = keygen(params, make_rng(resolve_seed(args.seed)))
        public = {"params_digest": digest, "A": list(kp.public.A.coeffs)}
        with open(args.out, "w") as fh:
            json.dump({**public, "secret": _secret_to_json(kp.secret)}, fh, sort_keys=True)
        kp.erase()
        _emit(json.dumps(public, sort_keys=True), out)
        return EXIT_OK
    with open(args.key) as fh:
        doc = json.load(fh)
    if doc.get("params_digest") != digest:
        raise ParamFileError("key file was made for different parameters")
    public = PkePublicKey(params.a, F(doc["A"]))
    if args.pke_cmd == "encrypt":
        m = parse_element(F, args.message)
        ct = encrypt(params, public, m, make_rng(resolve_seed(args.seed)))
        _emit(ct.encode().hex(), out)
        return EXIT_OK
    if "secret" not in doc:
        raise ParamFileError("key file holds no secret")
    sec = doc["secret"]
    P = TElement(params.orbit_ctx, F(sec["c0"]), (), [F(v) for v in sec["values"]])
    kp = PkeKeyPair(public, P)
    try:
        m = decrypt(params, kp, Ciphertext.decode(params, bytes.fromhex(args.ct)))
    finally:
        kp.erase()
    _emit(json.dumps({"m": m.value, "coeffs": list(m.coeffs)}), out)
    return EXIT_OK


def cmd_selftest(args, out) -> int:
    failed = None
    for res in run_selftest(mutate_delta=args.mutate_delta):
        _emit(res.line(), out)
        if not res.ok:
            failed = res
            break
    if failed:
        _emit(f"selftest failed: {failed.suite} at q={failed.q}: {failed.failure}", out)
        return EXIT_FAIL
    _emit("selftest passed", out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skewdh", description="Key agreement from the (sigma, delta)-conjugation action over GF(p^m).")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen-params", help="search an orbit and write a parameter file")
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--s", type=int, default=0, help="sigma = Frobenius^s")
    g.add_argument("--beta", default="0", help="int encoding or ascending coefficients, e.g. 0,1")
    g.add_argument("--parts", type=int, default=1)
    g.add_argument("--degree", type=int, default=None, help="d; default: smallest d whose power sum never vanishes")
    g.add_argument("--r-min", type=int, default=3)
    g.add_argument("--r-max", type=int, default=64)
    g.add_argument("--mode", choices=["normalized", "faithful"], default="normalized")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(fn=cmd_gen_params)

    d = sub.add_parser("demo", help="run handshakes in-process and print transcripts")
    d.add_argument("--params", required=True)
    d.add_argument("--seed", type=int)
    d.add_argument("--runs", type=int, default=1)
    d.add_argument("--verbose", action="store_true", help="print every transcript in batch mode")
    d.add_argument("--out", help="also write the transcript log here")
    d.set_defaults(fn=cmd_demo)

    s = sub.add_parser("serve", help="answer handshakes over TCP (responder)")
    s.add_argument("--params", required=True)
    s.add_argument("--port", type=int, default=7477)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--id", default="server")
    s.add_argument("--seed", type=int)
    s.add_argument("--once", action="store_true", help="exit after one connection")
    s.add_argument("--insecure-print", action="store_true", help="print the raw key next to its digest")
    s.set_defaults(fn=cmd_serve)

    c = sub.add_parser("connect", help="start a handshake over TCP (initiator)")
    c.add_argument("address", help="host:port")
    c.add_argument("--params", required=True)
    c.add_argument("--id", default="client")
    c.add_argument("--peer", default="server")
    c.add_argument("--sid", help="16-byte session id as hex")
    c.add_argument("--seed", type=int)
    c.add_argument("--insecure-print", action="store_true")
    c.set_defaults(fn=cmd_connect)

    gm = sub.add_parser("games", help="estimate adversary advantages")
    gm.add_argument("--params", required=True)
    gm.add_argument("--game", choices=["sap", "cgsap", "dgsap", "sk-am", "reduction"], required=True)
    gm.add_argument("--adversary", choices=["all", "brute-force", "coin-flip"], default="all")
    gm.add_argument("--trials", type=int, default=2000)
    gm.add_argument("--seed", type=int)
    gm.add_argument("--l", type=int, default=1, help="session bound for sk-am and reduction")
    gm.add_argument("--confidence", type=float, default=0.99)
    gm.set_defaults(fn=cmd_games)

    pk = sub.add_parser("pke", help="public-key encryption of single field elements")
    pks = pk.add_subparsers(dest="pke_cmd", required=True)
    kg = pks.add_parser("keygen")
    kg.add_argument("--params", required=True)
    kg.add_argument("--out", required=True, help="key file (holds the secret)")
    kg.add_argument("--seed", type=int)
    en = pks.add_parser("encrypt")
    en.add_argument("--params", required=True)
    en.add_argument("--key", required=True, help="key file; only the public part is read")
    en.add_argument("--message", required=True, help="int encoding or coefficients")
    en.add_argument("--seed", type=int)
    de = pks.add_parser("decrypt")
    de.add_argument("--params", required=True)
    de.add_argument("--key", required=True)
    de.add_argument("--ct", required=True, help="ciphertext hex (c1 then c2)")
    pk.set_defaults(fn=cmd_pke)

    st = sub.add_parser("selftest", help="exhaustive invariants at q = 4, 5, 8, 9")
    st.add_argument("--mutate-delta", action="store_true", help="negative control: break delta on purpose")
    st.set_defaults(fn=cmd_selftest)
    return ap


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out)
    except GuardError as exc:
        print(f"skewdh: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ParamFileError, NoSuitableOrbit, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"skewdh: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ProtocolError, SkewDHError) as exc:
        print(f"skewdh: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
