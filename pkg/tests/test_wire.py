import json
import socket
import threading
from pathlib import Path

import numpy as np
import pytest

from skewdh.exceptions import DegenerateSession, DigestMismatch, MalformedFrame, NoSuitableOrbit, ParamFileError
from skewdh.field import GF
from skewdh.protocol import MAGIC, VERSION
from skewdh.skew import Twist, orbit_partition
from skewdh.wire import (
    TYPE_ERROR,
    TYPE_HELLO,
    FrameReader,
    TranscriptRecord,
    canonical_json,
    demo_run,
    dump_params,
    error_frame,
    gen_params,
    hello_frame,
    load_params,
    params_digest,
    params_from_dict,
    params_to_dict,
    replay,
    run_initiator,
    serve,
    serve_connection,
)

from test_protocol import worked_params

GOLDEN = Path(__file__).parent / "data" / "golden_wire.json"


def q16(seed=1, **kw):
    return gen_params(2, 4, 2, 0, n_parts=2, rng=np.random.default_rng(seed), **kw)


# -- parameter files ------------------------------------------------------------------


def test_gen_params_f4_orbit_size_three():
    params = gen_params(2, 2, 1, 0, rng=np.random.default_rng(0))
    F = params.field
    # oracle: enumerate the orbit of a directly from the action
    orbit = {params.twist.phi(c, params.a).value for c in F.nonzero_elements()}
    assert params.r == len(orbit) == 3


def test_gen_params_orbit_size_law_q16():
    params = q16()
    F = params.field
    tw = Twist(F, 2, F.zero)
    # every nonzero orbit has (q-1)/gcd(p^s - 1, q - 1) = 15/3 = 5 points
    assert {ctx.r for ctx in orbit_partition(tw) if F.zero not in ctx} == {5}
    assert params.r == 5


def test_gen_params_prime_field_has_no_orbit():
    with pytest.raises(NoSuitableOrbit):
        gen_params(2, 1, 0, 0, rng=np.random.default_rng(0))


def test_gen_params_respects_range():
    params = gen_params(2, 8, 4, [1, 1], n_parts=2, r_min=17, r_max=17, rng=np.random.default_rng(3))
    assert params.r == 17
    with pytest.raises(NoSuitableOrbit):
        gen_params(2, 8, 4, [1, 1], r_min=18, r_max=40, rng=np.random.default_rng(3))


def test_gen_params_vanishing_degree_warns():
    with pytest.warns(UserWarning, match="power sum"):
        gen_params(2, 2, 1, 0, d=2, rng=np.random.default_rng(0))


def test_param_file_round_trip(tmp_path):
    params = q16(seed=4)
    path = tmp_path / "p.json"
    path.write_text(dump_params(params))
    again = load_params(path)
    assert params_to_dict(again) == params_to_dict(params)
    assert params_digest(again) == params_digest(params)


def test_digest_is_sha256_of_sorted_compact_json():
    import hashlib

    params = worked_params()
    doc = params_to_dict(params)
    text = canonical_json(doc)
    assert b" " not in text and b"\n" not in text
    assert list(json.loads(text)) == sorted(doc)
    assert params_digest(params) == hashlib.sha256(text).digest()
    # key order of the input dict does not matter
    shuffled = dict(reversed(list(doc.items())))
    assert canonical_json(shuffled) == text


def test_direction_parts_are_accepted():
    params = worked_params()
    doc = params_to_dict(params)
    from skewdh.tset import derive_direction

    doc["parts"] = [{"direction": [list(v.coeffs) for v in derive_direction(params.field, p.sheet, p.row_products)]} for p in params.tparams.parts]
    again = params_from_dict(doc)
    assert again.tparams.parts[0].direction == params.tparams.parts[0].direction


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("modulus"),
        lambda d: d.update(p=4),
        lambda d: d.update(modulus=[1, 0, 1]),  # x^2 + 1 is reducible over F_2
        lambda d: d.update(a=[0, 2]),
        lambda d: d.update(beta="one"),
        lambda d: d.update(mode="other"),
        lambda d: d.update(n_parts=7),
        lambda d: d["parts"][0].update(sheet=[]),
    ],
)
def test_bad_param_files(mutate):
    doc = params_to_dict(q16())
    mutate(doc)
    with pytest.raises(ParamFileError):
        params_from_dict(doc)


def test_load_params_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    with pytest.raises(ParamFileError):
        load_params(path)
    with pytest.raises(ParamFileError):
        load_params(tmp_path / "missing.json")


# -- transcripts ----------------------------------------------------------------------


def test_demo_keys_match_and_replay():
    params = q16()
    recs = demo_run(params, np.random.default_rng(9))
    assert recs[0].key == recs[1].key and recs[0].key is not None
    assert len(recs[0].messages) == 2 and recs[0].messages == recs[1].messages
    lines = [r.to_json() for r in recs]
    parsed = [TranscriptRecord.from_json(params.field, line) for line in lines]
    assert replay(params, parsed, np.random.default_rng(9))
    assert not replay(params, parsed, np.random.default_rng(10))


def test_demo_records_degenerate_abort():
    params = q16()
    aborted = None
    for seed in range(200):
        recs = demo_run(params, np.random.default_rng(seed))
        if recs[0].abort:
            aborted = recs
            break
    assert aborted is not None
    assert aborted[0].abort.startswith("degenerate") and aborted[0].key is None and aborted[1].key is None


def test_transcript_without_key():
    recs = demo_run(worked_params(), np.random.default_rng(1))
    assert json.loads(recs[0].to_json(with_key=False))["key"] is None


@pytest.mark.filterwarnings("ignore::skewdh.tset.DegenerateDirectionWarning")
def test_demo_batch_never_mismatches():
    params = gen_params(2, 3, 1, 0, n_parts=2, rng=np.random.default_rng(2))
    for seed in range(300):
        i, j = demo_run(params, np.random.default_rng(seed))
        assert i.abort or i.key == j.key


# -- framing ---------------------------------------------------------------------------


def reader_over(data: bytes, F):
    buf = [data]

    def recv(n):
        chunk, buf[0] = buf[0][:n], buf[0][n:]
        return chunk

    return FrameReader(recv, F)


def test_hello_and_error_frames():
    d = bytes(range(32))
    assert hello_frame(d) == b"SKDH\x01\x00" + d
    assert error_frame("no") == b"SKDH\x01\xff\x02no"
    F = GF(2, 2)
    r = reader_over(hello_frame(d) + error_frame("bye"), F)
    assert r.read()[0::2] == (TYPE_HELLO, d)
    assert r.read()[0::2] == (TYPE_ERROR, "bye")
    with pytest.raises(ValueError):
        hello_frame(b"short")


@pytest.mark.parametrize(
    "data",
    [
        b"SKD",
        b"XXXX\x01\x00" + bytes(32),
        b"SKDH\x02\x00" + bytes(32),
        b"SKDH\x01\x07",
        b"SKDH\x01\x00" + bytes(31),
        b"SKDH\x01\x01" + bytes(16) + b"\x05alice\x00\x00",
    ],
)
def test_malformed_streams(data):
    with pytest.raises(MalformedFrame):
        reader_over(data, GF(2, 2)).read()


def pair_run(p_init, p_resp, seed_i=1, seed_r=2, sid=None):
    a, b = socket.socketpair()
    out = {}

    def server():
        try:
            out["resp"] = serve_connection(b, p_resp, np.random.default_rng(seed_r), "bob")
        except Exception as exc:  # handed back to the test
            out["resp"] = exc
        finally:
            b.close()

    t = threading.Thread(target=server)
    t.start()
    try:
        out["init"] = run_initiator(a, p_init, np.random.default_rng(seed_i), "alice", "bob", sid)
    except Exception as exc:
        out["init"] = exc
    finally:
        a.close()
        t.join(5)
    return out["init"], out["resp"]


def test_socket_handshake_agrees():
    params = q16()
    for seed in range(5):
        i, r = pair_run(params, params, seed, seed + 100)
        if isinstance(r, DegenerateSession):
            assert isinstance(i, DegenerateSession)
            continue
        assert i.instance.sk == r.instance.sk
        assert i.sent[1:] == r.received[1:] and r.sent[1:] == i.received[1:]


def test_digest_mismatch_stops_before_any_pk():
    i, r = pair_run(q16(seed=1), q16(seed=2))
    assert isinstance(i, DigestMismatch) and isinstance(r, DigestMismatch)
    a, b = socket.socketpair()
    with a, b:
        a.sendall(hello_frame(params_digest(q16(seed=2))))
        with pytest.raises(DigestMismatch):
            serve_connection(b, q16(seed=1), np.random.default_rng(0), "bob")
        rest = a.recv(4096)
    assert rest[:6] == MAGIC + bytes([VERSION, TYPE_ERROR]) and b"digest" in rest


def test_truncated_frame_is_malformed():
    params = q16()
    a, b = socket.socketpair()
    with a, b:
        a.sendall(hello_frame(params_digest(params))[:20])
        a.shutdown(socket.SHUT_WR)
        with pytest.raises(MalformedFrame):
            serve_connection(b, params, np.random.default_rng(0), "bob")


def test_tcp_serve_once():
    params = q16()
    ready = threading.Event()
    port, results = [], []

    def on_ready(p):
        port.append(p)
        ready.set()

    t = threading.Thread(target=serve, args=(0, params, 5), kwargs=dict(once=True, on_result=results.append, ready=on_ready))
    t.start()
    assert ready.wait(5)
    from skewdh.wire import connect

    try:
        res = connect("127.0.0.1", port[0], params, np.random.default_rng(6), "client", "server")
    except DegenerateSession:
        res = None
    t.join(5)
    if res is not None:
        assert results[0].instance.sk == res.instance.sk


# -- golden transcript ----------------------------------------------------------------


def record_golden() -> dict:
    params = q16(seed=1)
    sid = bytes.fromhex("00112233445566778899aabbccddeeff")
    i, r = pair_run(params, params, 12, 13, sid)
    return {
        "params": params_to_dict(params),
        "initiator_seed": 12,
        "responder_seed": 13,
        "sid": sid.hex(),
        "initiator_frames": [f.hex() for f in i.sent],
        "responder_frames": [f.hex() for f in r.sent],
        "key": i.instance.sk.encode().hex(),
    }


def test_golden_wire_transcript_replays():
    gold = json.loads(GOLDEN.read_text())
    params = params_from_dict(gold["params"])
    i, r = pair_run(params, params, gold["initiator_seed"], gold["responder_seed"], bytes.fromhex(gold["sid"]))
    assert [f.hex() for f in i.sent] == gold["initiator_frames"]
    assert [f.hex() for f in r.sent] == gold["responder_frames"]
    assert i.instance.sk.encode().hex() == r.instance.sk.encode().hex() == gold["key"]


if __name__ == "__main__":
    GOLDEN.parent.mkdir(exist_ok=True)
    GOLDEN.write_text(json.dumps(record_golden(), indent=1) + "\n")
    print(f"wrote {GOLDEN}")
