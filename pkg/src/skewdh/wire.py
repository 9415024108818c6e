"""Parameter files, transcripts and the byte-stream handshake.

Every frame starts with ``SKDH`` and a version byte, then a type byte:

    0x00 hello   32-byte SHA-256 digest of the canonical parameter file
    0x01 init    protocol message (see protocol.py)
    0x02 resp    protocol message
    0xFF error   1-byte length + UTF-8 reason

The byte stream carries no extra length prefix: each frame's size follows
from its type, the id-length byte and the field size.
"""

from __future__ import annotations

import hashlib
import json
import socket
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import (
    DegenerateSession,
    DigestMismatch,
    FieldError,
    MalformedFrame,
    NoSuitableOrbit,
    ParamFileError,
    ProtocolError,
    SkewDHError,
)
from .field import GF, FieldElement, FieldParams, decode, encode, make_field
from .protocol import (
    MAGIC,
    SID_LEN,
    TYPE_INIT,
    TYPE_RESP,
    VERSION,
    DomainParams,
    InitMessage,
    RespMessage,
    SessionInstance,
    decode_message,
    finalize,
    initiate,
    pick_degree,
    power_sum_nonvanishing,
    respond,
)
from .skew import Twist, conjugacy_class, orbit_size_formula
from .tset import MODES, NORMALIZED, make_part, part_from_direction, t_params_from_parts, t_params_gen

TYPE_HELLO = 0x00
TYPE_ERROR = 0xFF
DIGEST_LEN = 32

R_MIN_DEFAULT = 3
R_MAX_DEFAULT = 64


# ---------------------------------------------------------------------------
# Parameter files


def _coeffs(x: FieldElement) -> list[int]:
    return list(x.coeffs)


def params_to_dict(params: DomainParams) -> dict:
    F, tw = params.field, params.twist
    return {
        "p": F.p,
        "m": F.m,
        "modulus": list(F.modulus),
        "s": tw.s,
        "beta": _coeffs(tw.beta),
        "a": _coeffs(params.a),
        "d": params.d,
        "n_parts": params.tparams.n_parts,
        "parts": [
            {"sheet": [_coeffs(x) for x in part.sheet], "row_products": [_coeffs(x) for x in part.row_products]}
            for part in params.tparams.parts
        ],
        "mode": params.tparams.mode,
    }


def canonical_json(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def params_digest(params: DomainParams) -> bytes:
    return hashlib.sha256(canonical_json(params_to_dict(params))).digest()


def _elem(F: FieldParams, raw, what: str) -> FieldElement:
    if isinstance(raw, int):
        raw = [raw]
    if not isinstance(raw, list) or not all(isinstance(c, int) for c in raw):
        raise ParamFileError(f"{what}: expected a coefficient array")
    if len(raw) > F.m:
        raise ParamFileError(f"{what}: more than {F.m} coefficients")
    if any(not 0 <= c < F.p for c in raw):
        raise ParamFileError(f"{what}: coefficient outside [0, {F.p})")
    return F(list(raw) + [0] * (F.m - len(raw)))


def params_from_dict(doc: dict) -> DomainParams:
    try:
        F = make_field(int(doc["p"]), int(doc["m"]), [int(c) for c in doc["modulus"]])
        tw = Twist(F, int(doc["s"]), _elem(F, doc["beta"], "beta"))
        a = _elem(F, doc["a"], "a")
        ctx = conjugacy_class(tw, a)
        parts = []
        for k, raw in enumerate(doc["parts"]):
            if "direction" in raw:
                sheet = [_elem(F, x, f"parts[{k}].sheet") for x in raw["sheet"]] if "sheet" in raw else None
                parts.append(part_from_direction(F, [_elem(F, x, f"parts[{k}].direction") for x in raw["direction"]], sheet))
            else:
                sheet = [_elem(F, x, f"parts[{k}].sheet") for x in raw["sheet"]]
                rows = [_elem(F, x, f"parts[{k}].row_products") for x in raw["row_products"]]
                parts.append(make_part(F, sheet, rows))
        if "n_parts" in doc and int(doc["n_parts"]) != len(parts):
            raise ParamFileError("n_parts disagrees with the parts list")
        mode = doc.get("mode", NORMALIZED)
        if mode not in MODES:
            raise ParamFileError(f"unknown mode {mode!r}")
        tp = t_params_from_parts(ctx, parts, int(doc["d"]), mode)
        return DomainParams.from_tparams(tp)
    except ParamFileError:
        raise
    except (KeyError, TypeError, ValueError, FieldError, SkewDHError) as exc:
        raise ParamFileError(f"invalid parameter file: {exc}") from exc


def load_params(path) -> DomainParams:
    try:
        with open(path, "rb") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParamFileError(f"cannot read {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParamFileError("parameter file must hold a JSON object")
    return params_from_dict(doc)


def dump_params(params: DomainParams) -> str:
    return json.dumps(params_to_dict(params), sort_keys=True, indent=1) + "\n"


def gen_params(
    p: int,
    m: int,
    s: int,
    beta,
    n_parts: int = 1,
    d: int | None = None,
    r_min: int = R_MIN_DEFAULT,
    r_max: int = R_MAX_DEFAULT,
    rng=None,
    mode: str = NORMALIZED,
) -> DomainParams:
    """Pick a base point whose orbit size lies in [r_min, r_max] and draw T(X) data.

    Away from the fixed point -beta every orbit has the same size, so the
    size test needs no enumeration.  Orbits containing 0 are skipped (0 is
    never a valid public value).  The base is a uniform point off the fixed
    point, redrawn until its orbit is zero-free; since all candidate orbits
    are equally large this picks each of them with equal probability.
    Without ``d`` the smallest degree whose power sum has no root in F_q^*
    is used.
    """
    if rng is None:
        rng = np.random.default_rng()
    F = GF(p, m)
    tw = Twist(F, s, _elem(F, beta, "beta") if not isinstance(beta, FieldElement) else beta)
    fixed = -tw.beta
    r = orbit_size_formula(tw, fixed + F.one)
    n_orbits = (F.q - 1) // r
    # with beta != 0 the point 0 is not fixed and spoils exactly one orbit
    usable = n_orbits - (1 if tw.beta else 0)
    if not max(r_min, 2) <= r <= r_max or usable == 0:
        raise NoSuitableOrbit(f"no zero-free orbit with size in [{max(r_min, 2)}, {r_max}] for p={p} m={m} s={s}")
    while True:
        b = F(int(rng.integers(F.q)))
        if b == fixed:
            continue
        ctx = conjugacy_class(tw, b)
        if F.zero not in ctx:
            break
    if d is None:
        d = pick_degree(F)
    elif not power_sum_nonvanishing(F, d):
        warnings.warn(f"degree {d}: the power sum has roots in F_q^*, some sessions will abort", stacklevel=2)
    tp = t_params_gen(ctx, n_parts, d, rng, mode)
    return DomainParams.from_tparams(tp)


# ---------------------------------------------------------------------------
# Transcripts


@dataclass
class TranscriptRecord:
    role: str
    sid: bytes
    messages: list[bytes] = field(default_factory=list)
    key: FieldElement | None = None
    abort: str | None = None

    def to_json(self, with_key: bool = True) -> str:
        doc = {
            "role": self.role,
            "sid": self.sid.hex(),
            "messages": [m.hex() for m in self.messages],
            "key": encode(self.key).hex() if (with_key and self.key is not None) else None,
            "abort": self.abort,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, F: FieldParams, line: str) -> TranscriptRecord:
        doc = json.loads(line)
        key = decode(F, bytes.fromhex(doc["key"])) if doc.get("key") else None
        return cls(doc["role"], bytes.fromhex(doc["sid"]), [bytes.fromhex(m) for m in doc["messages"]], key, doc.get("abort"))


def key_digest(key: FieldElement) -> str:
    return hashlib.sha256(encode(key)).hexdigest()


def demo_run(params: DomainParams, rng, initiator: str = "alice", responder: str = "bob") -> tuple[TranscriptRecord, TranscriptRecord]:
    """One in-process handshake, logged from both sides.  Aborts are recorded, not raised."""
    sid = rng.bytes(SID_LEN)
    rec_i, rec_j = TranscriptRecord("initiator", sid), TranscriptRecord("responder", sid)
    inst_i, m1 = initiate(params, initiator, responder, sid, rng)
    rec_i.messages.append(m1.encode())
    rec_j.messages.append(m1.encode())
    try:
        inst_j, m2 = respond(params, responder, m1, rng)
    except DegenerateSession as exc:
        rec_j.abort = rec_i.abort = f"degenerate: {exc}"
        return rec_i, rec_j
    rec_j.key = inst_j.sk
    rec_i.messages.append(m2.encode())
    rec_j.messages.append(m2.encode())
    try:
        rec_i.key = finalize(params, inst_i, m2)
    except DegenerateSession as exc:
        rec_i.abort = f"degenerate: {exc}"
    return rec_i, rec_j


def replay(params: DomainParams, records: list[TranscriptRecord], rng) -> bool:
    """Re-run the handshake with the same RNG stream and compare every logged field."""
    fresh = demo_run(params, rng)
    return [r.to_json() for r in fresh] == [r.to_json() for r in records]


# ---------------------------------------------------------------------------
# Framing over a byte stream


def hello_frame(digest: bytes) -> bytes:
    if len(digest) != DIGEST_LEN:
        raise ValueError("digest must be 32 bytes")
    return MAGIC + bytes([VERSION, TYPE_HELLO]) + digest


def error_frame(reason: str) -> bytes:
    raw = reason.encode()[:255]
    return MAGIC + bytes([VERSION, TYPE_ERROR, len(raw)]) + raw


class PeerError(ProtocolError):
    """The peer closed the handshake with an error frame."""


class FrameReader:
    """Reads whole frames from a ``recv``-like callable."""

    def __init__(self, recv: Callable[[int], bytes], F: FieldParams):
        self._recv = recv
        self.F = F
        self.log: list[bytes] = []

    def _exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self._recv(n - len(buf))
            if not chunk:
                raise MalformedFrame(f"stream ended after {len(buf)} of {n} bytes")
            buf += chunk
        return buf

    def read(self) -> tuple[int, bytes, object]:
        head = self._exact(6)
        if head[:4] != MAGIC or head[4] != VERSION:
            raise MalformedFrame("bad magic or version")
        kind = head[5]
        if kind == TYPE_HELLO:
            frame = head + self._exact(DIGEST_LEN)
            payload: object = frame[6:]
        elif kind == TYPE_ERROR:
            n = self._exact(1)
            frame = head + n + self._exact(n[0])
            payload = frame[7:].decode(errors="replace")
        elif kind in (TYPE_INIT, TYPE_RESP):
            mid = self._exact(SID_LEN + 1)
            frame = head + mid + self._exact(mid[-1] + 2 * self.F.m)
            payload = decode_message(self.F, frame)
        else:
            raise MalformedFrame(f"unknown frame type {kind:#04x}")
        self.log.append(frame)
        return kind, frame, payload


@dataclass
class WireResult:
    instance: SessionInstance | None
    sent: list[bytes]
    received: list[bytes]


def _expect(reader: FrameReader, kind: int):
    got, _, payload = reader.read()
    if got == TYPE_ERROR:
        if payload.startswith("digest"):
            raise DigestMismatch(payload)
        if payload.startswith("degenerate"):
            raise DegenerateSession(payload)
        raise PeerError(payload)
    if got != kind:
        raise MalformedFrame(f"expected frame type {kind:#04x}, got {got:#04x}")
    return payload


def run_initiator(sock, params: DomainParams, rng, self_id: str, peer_id: str, sid: bytes | None = None) -> WireResult:
    digest = params_digest(params)
    reader = FrameReader(sock.recv, params.field)
    sent: list[bytes] = []

    def send(frame: bytes):
        sock.sendall(frame)
        sent.append(frame)

    send(hello_frame(digest))
    if _expect(reader, TYPE_HELLO) != digest:
        raise DigestMismatch("peer uses different parameters")
    if sid is None:
        sid = rng.bytes(SID_LEN)
    inst, m1 = initiate(params, self_id, peer_id, sid, rng)
    send(m1.encode())
    resp = _expect(reader, TYPE_RESP)
    if not isinstance(resp, RespMessage):
        raise MalformedFrame("expected a response message")
    try:
        finalize(params, inst, resp)
    except ProtocolError as exc:
        try:
            send(error_frame(f"{type(exc).__name__}: {exc}"))
        except OSError:
            pass
        raise
    return WireResult(inst, sent, reader.log)


def serve_connection(sock, params: DomainParams, rng, self_id: str) -> WireResult:
    """Responder side of one connection.  Failures are reported to the peer, then raised."""
    digest = params_digest(params)
    reader = FrameReader(sock.recv, params.field)
    sent: list[bytes] = []

    def send(frame: bytes):
        sock.sendall(frame)
        sent.append(frame)

    try:
        peer_digest = _expect(reader, TYPE_HELLO)
        if peer_digest != digest:
            raise DigestMismatch("digest mismatch: peer uses different parameters")
        send(hello_frame(digest))
        init = _expect(reader, TYPE_INIT)
        if not isinstance(init, InitMessage):
            raise MalformedFrame("expected an init message")
        try:
            inst, m2 = respond(params, self_id, init, rng)
        except DegenerateSession as exc:
            raise DegenerateSession(f"degenerate: {exc}") from exc
        send(m2.encode())
    except (ProtocolError, FieldError) as exc:
        reason = str(exc) if isinstance(exc, (DigestMismatch, DegenerateSession)) else f"{type(exc).__name__}: {exc}"
        try:
            send(error_frame(reason))
        except OSError:
            pass
        raise
    return WireResult(inst, sent, reader.log)


def connect(host: str, port: int, params: DomainParams, rng, self_id: str, peer_id: str, sid: bytes | None = None, timeout: float = 10.0) -> WireResult:
    with socket.create_connection((host, port), timeout=timeout) as sock:
        return run_initiator(sock, params, rng, self_id, peer_id, sid)


def serve(
    port: int,
    params: DomainParams,
    seed: int | None,
    self_id: str = "server",
    once: bool = False,
    host: str = "127.0.0.1",
    on_result: Callable[[WireResult | Exception], None] | None = None,
    ready: Callable[[int], None] | None = None,
) -> None:
    """Accept connections, one handshake each.  Connection k uses RNG stream (seed, k)."""
    import socketserver
    import threading

    counter = iter(range(1 << 62))
    lock = threading.Lock()

    class Handler(socketserver.BaseRequestHandler):
        def handle(self):
            with lock:
                k = next(counter)
            rng = np.random.default_rng([seed, k]) if seed is not None else np.random.default_rng()
            try:
                res: WireResult | Exception = serve_connection(self.request, params, rng, self_id)
            except (SkewDHError, OSError) as exc:
                res = exc
            if on_result:
                on_result(res)

    socketserver.ThreadingTCPServer.allow_reuse_address = True
    with socketserver.ThreadingTCPServer((host, port), Handler) as srv:
        # server_close() joins handler threads only when they are not daemons
        srv.daemon_threads = not once
        if ready:
            ready(srv.server_address[1])
        if once:
            srv.handle_request()
        else:
            srv.serve_forever()

