"""Two-message key exchange over the conjugation action, as a session state machine.

Initiator U_i                                  Responder U_j
  P <- T(X), pk_i = phi(P(a), a)   -- init -->
                                               Q <- T(X), pk_j = phi(Q(a), a)
                                               c = Q(pk_i) + Q(pk_j)
                                               k_j = phi(c * S, pk_i), erase Q
                                   <-- resp --
  c = P(pk_j) + P(pk_i)
  k_i = phi(c * S, pk_j), erase P

with S = sum_{k=0..d} (pk_i pk_j)^k.  Agreement follows from the action law
phi(x, phi(y, b)) = phi(xy, b) and the cross-commutation of T(X) values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

from .exceptions import (
    AlreadyTerminated,
    BadLength,
    CoefficientOutOfRange,
    DegenerateSession,
    MalformedFrame,
    PkNotInOrbit,
    ProtocolError,
    WrongRole,
    ZeroDirectionUnavoidable,
)
from .field import FieldElement, FieldParams, decode, encode
from .skew import OrbitContext, Twist
from .tset import TElement, TParams, t_sample, t_value_at

MAGIC = b"SKDH"
VERSION = 0x01
TYPE_INIT = 0x01
TYPE_RESP = 0x02
SID_LEN = 16

INITIATOR = "initiator"
RESPONDER = "responder"
Role = Literal["initiator", "responder"]


@dataclass(frozen=True)
class DomainParams:
    """Public context shared by all users: field, twist, base point, orbit and T(X) data."""

    field: FieldParams
    twist: Twist
    a: FieldElement
    orbit_ctx: OrbitContext
    tparams: TParams
    d: int

    def __post_init__(self):
        if self.twist.field != self.field or self.orbit_ctx.twist != self.twist:
            raise ValueError("field, twist and orbit context disagree")
        if self.orbit_ctx.base != self.a:
            raise ValueError("base point must be the first orbit element")
        if self.orbit_ctx.r < 2:
            raise ValueError(f"orbit of size {self.orbit_ctx.r} is too small")
        if self.field.zero in self.orbit_ctx:
            raise ValueError("orbit contains 0, which is not a valid public key")
        if self.tparams.orbit_ctx != self.orbit_ctx:
            raise ValueError("T(X) parameters belong to a different orbit")
        if not all(self.tparams.direction_sum):
            raise ValueError("summed direction has a zero entry")
        if self.d < 0:
            raise ValueError("d must be >= 0")

    @classmethod
    def from_tparams(cls, tparams: TParams, d: int | None = None) -> DomainParams:
        ctx = tparams.orbit_ctx
        return cls(ctx.twist.field, ctx.twist, ctx.base, ctx, tparams, tparams.d if d is None else d)

    @property
    def r(self) -> int:
        return self.orbit_ctx.r

    def check_pk(self, pk: FieldElement) -> None:
        if pk.field != self.field or not pk or pk not in self.orbit_ctx:
            raise PkNotInOrbit(f"public value {pk!r} is not a nonzero orbit element")


# ---------------------------------------------------------------------------
# Messages


@dataclass(frozen=True)
class _Message:
    sender: str
    sid: bytes
    pk: FieldElement

    msg_type = 0

    def __post_init__(self):
        if len(self.sid) != SID_LEN:
            raise ValueError(f"sid must be {SID_LEN} bytes")
        if len(self.sender.encode()) > 255:
            raise ValueError("sender id longer than 255 bytes")

    def encode(self) -> bytes:
        ident = self.sender.encode()
        return MAGIC + bytes([VERSION, self.msg_type]) + self.sid + bytes([len(ident)]) + ident + encode(self.pk)


class InitMessage(_Message):
    msg_type = TYPE_INIT


class RespMessage(_Message):
    msg_type = TYPE_RESP


def decode_message(F: FieldParams, data: bytes) -> InitMessage | RespMessage:
    """Parse one protocol frame; the pk length is fixed by the field (2m bytes)."""
    head = len(MAGIC) + 2 + SID_LEN + 1
    if len(data) < head or data[:4] != MAGIC:
        raise MalformedFrame("bad magic or truncated header")
    version, kind = data[4], data[5]
    if version != VERSION:
        raise MalformedFrame(f"unsupported version {version}")
    cls = {TYPE_INIT: InitMessage, TYPE_RESP: RespMessage}.get(kind)
    if cls is None:
        raise MalformedFrame(f"unknown message type {kind:#04x}")
    sid = data[6 : 6 + SID_LEN]
    n = data[head - 1]
    ident = data[head : head + n]
    pk_bytes = data[head + n :]
    if len(ident) != n or len(pk_bytes) != 2 * F.m:
        raise MalformedFrame("frame length does not match field size")
    try:
        sender = ident.decode()
        pk = decode(F, pk_bytes)
    except (UnicodeDecodeError, BadLength, CoefficientOutOfRange) as exc:
        raise MalformedFrame(str(exc)) from exc
    return cls(sender, bytes(sid), pk)


# ---------------------------------------------------------------------------
# Session state


@dataclass(eq=False)
class SessionInstance:
    role: Role
    self_id: str
    peer_id: str
    sid: bytes
    used: bool = False
    acc: bool = False
    term: bool = False
    sk: FieldElement | None = None
    secret: TElement | None = field(default=None, repr=False)
    own_pk: FieldElement | None = None
    peer_pk: FieldElement | None = None

    @property
    def pid(self) -> frozenset[str]:
        return frozenset((self.self_id, self.peer_id))

    def key(self) -> FieldElement:
        if not self.acc or self.sk is None:
            raise ProtocolError("session has not accepted a key")
        return self.sk

    def serialize(self) -> bytes:
        """Public-facing state dump; never includes the secret."""

        def enc(x):
            return None if x is None else encode(x).hex()

        state = {
            "role": self.role,
            "pid": sorted(self.pid),
            "sid": self.sid.hex(),
            "used": self.used,
            "acc": self.acc,
            "term": self.term,
            "sk": enc(self.sk),
            "own_pk": enc(self.own_pk),
            "peer_pk": enc(self.peer_pk),
            "holds_secret": self.secret is not None,
        }
        return json.dumps(state, sort_keys=True).encode()


def erase(instance: SessionInstance) -> None:
    """Zero the secret in place and drop it.  Safe to call repeatedly."""
    if instance.secret is not None:
        instance.secret.wipe()
        instance.secret = None


def _abort(instance: SessionInstance) -> None:
    erase(instance)
    instance.acc = False
    instance.sk = None
    instance.term = True


def power_sum(params: DomainParams, x: FieldElement, y: FieldElement) -> FieldElement:
    """S = sum_{k=0..d} (x y)^k."""
    F = params.field
    xy = (x * y).value
    acc, term = 0, 1
    for _ in range(params.d + 1):
        acc = F._add(acc, term)
        term = F._mul(term, xy)
    return FieldElement(F, acc)


def power_sum_nonvanishing(F: FieldParams, d: int) -> bool:
    """True when S = (x^(d+1) - 1)/(x - 1) has no root in F_q^*.

    Roots other than 1 are the nontrivial (d+1)-th roots of unity; at x = 1
    the sum is d + 1 reduced mod p.
    """
    return math.gcd(d + 1, F.q - 1) == 1 and (d + 1) % F.p != 0


def pick_degree(F: FieldParams, d_min: int = 1) -> int:
    """Smallest d >= d_min whose power sum never vanishes on nonzero inputs."""
    d = d_min
    while not power_sum_nonvanishing(F, d):
        d += 1
    return d


def mask_scalar(params: DomainParams, secret: TElement, own_pk: FieldElement, peer_pk: FieldElement) -> FieldElement:
    """(secret(peer_pk) + secret(own_pk)) * S; the actor that maps peer_pk to the key.

    May be zero; callers decide how to report that.
    """
    c = t_value_at(secret, peer_pk) + t_value_at(secret, own_pk)
    return c * power_sum(params, own_pk, peer_pk)


def public_value(params: DomainParams, secret: TElement) -> FieldElement:
    return params.twist.phi(t_value_at(secret, params.a), params.a)


def _fresh_secret(params: DomainParams, rng, c0: FieldElement | None) -> TElement:
    if c0 is not None:
        return t_sample(params.tparams, rng, c0=c0)
    for _ in range(64):
        try:
            return t_sample(params.tparams, rng)
        except ZeroDirectionUnavoidable:
            continue
    raise ZeroDirectionUnavoidable("could not sample a nowhere-zero secret")


def initiate(params: DomainParams, self_id: str, peer_id: str, sid: bytes, rng, c0: FieldElement | None = None) -> tuple[SessionInstance, InitMessage]:
    """Step 1.  ``c0`` pins the secret's scalar (tests and worked examples)."""
    inst = SessionInstance(INITIATOR, self_id, peer_id, bytes(sid), used=True)
    inst.secret = _fresh_secret(params, rng, c0)
    inst.own_pk = public_value(params, inst.secret)
    return inst, InitMessage(self_id, inst.sid, inst.own_pk)


def respond(params: DomainParams, self_id: str, msg: InitMessage, rng, c0: FieldElement | None = None) -> tuple[SessionInstance, RespMessage]:
    """Step 2.  On failure the aborted instance is attached to the exception as ``.instance``."""
    inst = SessionInstance(RESPONDER, self_id, msg.sender, msg.sid, used=True)
    try:
        if not isinstance(msg, InitMessage):
            raise ProtocolError("responder expects an init message")
        params.check_pk(msg.pk)
        inst.peer_pk = msg.pk
        inst.secret = _fresh_secret(params, rng, c0)
        inst.own_pk = public_value(params, inst.secret)
        actor = mask_scalar(params, inst.secret, inst.own_pk, inst.peer_pk)
        if not actor:
            raise DegenerateSession("Q(pk_i) + Q(pk_j) or the power sum vanished")
        key = params.twist.phi(actor, inst.peer_pk)
    except ProtocolError as exc:
        _abort(inst)
        exc.instance = inst
        raise
    erase(inst)
    inst.sk, inst.acc, inst.term = key, True, True
    return inst, RespMessage(self_id, inst.sid, inst.own_pk)


def finalize(params: DomainParams, instance: SessionInstance, msg: RespMessage) -> FieldElement:
    """Step 3: derive k_i and erase P."""
    if instance.role != INITIATOR:
        raise WrongRole("finalize needs an initiator instance")
    if instance.term:
        raise AlreadyTerminated("session already terminated")
    if not isinstance(msg, RespMessage) or msg.sid != instance.sid:
        raise ProtocolError("response does not belong to this session")
    try:
        params.check_pk(msg.pk)
        instance.peer_pk = msg.pk
        actor = mask_scalar(params, instance.secret, instance.own_pk, msg.pk)
        if not actor:
            raise DegenerateSession("P(pk_j) + P(pk_i) or the power sum vanished")
        key = params.twist.phi(actor, msg.pk)
    except ProtocolError:
        _abort(instance)
        raise
    erase(instance)
    instance.sk, instance.acc, instance.term = key, True, True
    return key


def handshake(params: DomainParams, rng, initiator: str = "alice", responder: str = "bob", sid: bytes | None = None) -> tuple[SessionInstance, SessionInstance]:
    """Run both sides in-process.  Degenerate runs raise; callers may retry."""
    if sid is None:
        sid = rng.bytes(SID_LEN)
    inst_i, m1 = initiate(params, initiator, responder, sid, rng)
    try:
        inst_j, m2 = respond(params, responder, m1, rng)
    except ProtocolError:
        _abort(inst_i)
        raise
    finalize(params, inst_i, m2)
    return inst_i, inst_j

