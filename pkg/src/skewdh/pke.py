"""Probabilistic public-key encryption built on the key-exchange mask.

Public key (a, A = phi(P(a), a)).  To encrypt m the sender draws Q, sends
c1 = phi(Q(a), a) and c2 = m + phi((Q(A) + Q(c1)) S, A).  The receiver
recomputes the same mask from P and c1, exactly as the two sides of a
handshake agree on a key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import BadLength, DegenerateCiphertext, DegenerateEncryption, NotInOrbit
from .field import FieldElement, decode, encode
from .protocol import DomainParams, _fresh_secret, mask_scalar, public_value
from .tset import TElement

RESAMPLE_LIMIT = 64


@dataclass(frozen=True)
class PkePublicKey:
    a: FieldElement
    A: FieldElement

    def encode(self) -> bytes:
        return encode(self.A)


@dataclass(eq=False)
class PkeKeyPair:
    public: PkePublicKey
    secret: TElement | None = field(default=None, repr=False)

    def erase(self) -> None:
        if self.secret is not None:
            self.secret.wipe()
            self.secret = None


@dataclass(frozen=True)
class Ciphertext:
    c1: FieldElement
    c2: FieldElement

    def encode(self) -> bytes:
        return encode(self.c1) + encode(self.c2)

    @classmethod
    def decode(cls, params: DomainParams, data: bytes) -> Ciphertext:
        n = 2 * params.field.m
        if len(data) != 2 * n:
            raise BadLength(f"ciphertext must be {2 * n} bytes, got {len(data)}")
        return cls(decode(params.field, data[:n]), decode(params.field, data[n:]))


def keygen(params: DomainParams, rng, c0: FieldElement | None = None) -> PkeKeyPair:
    P = _fresh_secret(params, rng, c0)
    return PkeKeyPair(PkePublicKey(params.a, public_value(params, P)), P)


def encrypt(params: DomainParams, public: PkePublicKey, m: FieldElement, rng, c0: FieldElement | None = None) -> Ciphertext:
    """Fresh Q per call, redrawn while the mask actor vanishes.

    With ``c0`` pinned there is nothing to redraw, so a degenerate mask raises at once.
    """
    if m.field != params.field:
        raise ValueError("message must be an element of the parameter field")
    params.check_pk(public.A)
    tries = 1 if c0 is not None else RESAMPLE_LIMIT
    for _ in range(tries):
        Q = _fresh_secret(params, rng, c0)
        try:
            c1 = public_value(params, Q)
            actor = mask_scalar(params, Q, c1, public.A)
        finally:
            Q.wipe()
        if actor:
            return Ciphertext(c1, params.twist.phi(actor, public.A) + m)
    raise DegenerateEncryption(f"mask vanished in {tries} draw(s)")


def decrypt(params: DomainParams, keypair: PkeKeyPair, ct: Ciphertext) -> FieldElement:
    if keypair.secret is None:
        raise ValueError("key pair has been erased")
    if not ct.c1 or ct.c1 not in params.orbit_ctx:
        raise NotInOrbit(f"c1 = {ct.c1!r} is not in the orbit of {params.a!r}")
    actor = mask_scalar(params, keypair.secret, keypair.public.A, ct.c1)
    if not actor:
        raise DegenerateCiphertext("P(c1) + P(A) or the power sum vanished")
    return ct.c2 - params.twist.phi(actor, ct.c1)
