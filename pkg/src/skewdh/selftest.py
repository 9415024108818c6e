"""Exhaustive invariant checks over the small fields q = 4, 5, 8, 9.

Each suite yields one ``SuiteResult``; the run stops at the first failure.
``mutate_delta`` swaps in a twist whose delta is off by a constant, which
the derivation-law suite must catch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import DegenerateEncryption, DegenerateSession
from .field import GF, FieldElement, FieldParams
from .pke import decrypt, encrypt, keygen
from .protocol import DomainParams, finalize, initiate, pick_degree, respond
from .skew import PointFunction, Twist, conjugacy_class, orbit_partition, orbit_size_formula, psi, skew_product
from .tset import t_params_gen

FIELDS = ((2, 2), (5, 1), (2, 3), (3, 2))
SEED = 2024


@dataclass
class SuiteResult:
    suite: str
    q: int
    checks: int
    failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def line(self) -> str:
        status = "ok" if self.ok else f"FAIL: {self.failure}"
        return f"q={self.q:<3} {self.suite:<18} {self.checks:>7} checks  {status}"


class _MutantTwist(Twist):
    def delta(self, x: FieldElement) -> FieldElement:
        return super().delta(x) + self.field.one


def _twists(F: FieldParams, mutate: bool) -> list[Twist]:
    cls = _MutantTwist if mutate else Twist
    betas = [F.zero, F.one] if F.q > 2 else [F.zero]
    return [cls(F, s, b) for s in range(F.m) for b in betas]


def _field_axioms(F: FieldParams) -> tuple[int, str | None]:
    n = 0
    els = F.elements()
    for x, y, z in itertools.product(els, repeat=3):
        n += 1
        if (x + y) + z != x + (y + z) or (x * y) * z != x * (y * z) or x * (y + z) != x * y + x * z:
            return n, f"field axioms fail at {x!r}, {y!r}, {z!r}"
    for x in els[1:]:
        n += 1
        if x * x.inverse() != F.one:
            return n, f"{x!r} has no inverse"
    return n, None


def _derivation_law(tw: Twist) -> tuple[int, str | None]:
    n = 0
    for a, b in itertools.product(tw.field.elements(), repeat=2):
        n += 1
        if tw.delta(a * b) != tw.sigma(a) * tw.delta(b) + tw.delta(a) * b:
            return n, f"delta(ab) != sigma(a)delta(b) + delta(a)b at a={a!r}, b={b!r} (s={tw.s}, beta={tw.beta!r})"
    return n, None


def _action_law(tw: Twist) -> tuple[int, str | None]:
    F = tw.field
    n = 0
    for b in F.elements():
        n += 1
        if tw.phi(F.one, b) != b:
            return n, f"phi(1, {b!r}) != {b!r}"
        for c1, c2 in itertools.product(F.nonzero_elements(), repeat=2):
            n += 1
            if tw.phi(c1 * c2, b) != tw.phi(c1, tw.phi(c2, b)):
                return n, f"phi(c1 c2, b) != phi(c1, phi(c2, b)) at c1={c1!r}, c2={c2!r}, b={b!r}"
    return n, None


def _orbits(tw: Twist) -> tuple[int, str | None]:
    F = tw.field
    seen: set[int] = set()
    n = 0
    for ctx in orbit_partition(tw):
        for x in ctx.orbit:
            n += 1
            if x.value in seen:
                return n, f"{x!r} lies in two orbits"
            seen.add(x.value)
            if orbit_size_formula(tw, x) != ctx.r:
                return n, f"orbit of {x!r} has {ctx.r} points, size law says {orbit_size_formula(tw, x)}"
    if len(seen) != F.q:
        return n, "orbits do not cover the field"
    return n, None


def _random_fn(F: FieldParams, rng, nowhere_zero: bool = False) -> PointFunction:
    lo = 1 if nowhere_zero else 0
    return PointFunction.from_values(F, rng.integers(lo, F.q, size=F.q))


def _near_ring(tw: Twist, rng, samples: int = 60) -> tuple[int, str | None]:
    F = tw.field
    one = PointFunction.const(F, F.one)
    n = 0
    for _ in range(samples):
        f, g, h = (_random_fn(F, rng) for _ in range(3))
        n += 1
        if skew_product(tw, one, f) != f or skew_product(tw, f, one) != f:
            return n, "constant 1 is not a two-sided unit"
        n += 1
        if skew_product(tw, f + g, h) != skew_product(tw, f, h) + skew_product(tw, g, h):
            return n, "right distributivity fails"
        n += 1
        if skew_product(tw, skew_product(tw, f, g), h) != skew_product(tw, f, skew_product(tw, g, h)):
            return n, "skew product is not associative"
        n += 1
        g_nz = _random_fn(F, rng, nowhere_zero=True)
        f_nz = _random_fn(F, rng, nowhere_zero=True)
        for b in F.elements():
            if psi(tw, skew_product(tw, f_nz, g_nz), b) != psi(tw, f_nz, psi(tw, g_nz, b)):
                return n, f"psi action law fails at b={b!r}"
    return n, None


def _protocol_params(tw: Twist, rng) -> DomainParams | None:
    F = tw.field
    for ctx in orbit_partition(tw):
        if ctx.r >= 2 and F.zero not in ctx:
            return DomainParams.from_tparams(t_params_gen(ctx, 2, pick_degree(F), rng))
    return None


def _protocol(params: DomainParams, rng) -> tuple[int, str | None]:
    F = params.field
    n = 0
    sid = bytes(16)
    for cp, cq in itertools.product(F.nonzero_elements(), repeat=2):
        ii, m1 = initiate(params, "i", "j", sid, rng, c0=cp)
        try:
            ij, m2 = respond(params, "j", m1, rng, c0=cq)
        except DegenerateSession:
            continue
        n += 1
        if finalize(params, ii, m2) != ij.sk:
            return n, f"keys differ for c0 pair ({cp!r}, {cq!r})"
    return n, None


def _pke(params: DomainParams, rng) -> tuple[int, str | None]:
    F = params.field
    n = 0
    kp = keygen(params, rng)
    for m in F.elements():
        try:
            ct = encrypt(params, kp.public, m, rng)
        except DegenerateEncryption:
            continue
        n += 1
        if decrypt(params, kp, ct) != m:
            return n, f"decrypt(encrypt({m!r})) != {m!r}"
    return n, None


def run_selftest(mutate_delta: bool = False, fields=FIELDS) -> Iterator[SuiteResult]:
    for p, m in fields:
        F = GF(p, m)
        rng = np.random.default_rng([SEED, F.q])
        yield SuiteResult("field-axioms", F.q, *_field_axioms(F))
        tally: dict[str, list] = {}

        def run(name, fn, *args):
            n, err = fn(*args)
            slot = tally.setdefault(name, [0, None])
            slot[0] += n
            if err and slot[1] is None:
                slot[1] = err
            return err

        for tw in _twists(F, mutate_delta):
            for name, fn in (("derivation-law", _derivation_law), ("action-law", _action_law), ("orbits", _orbits)):
                if run(name, fn, tw):
                    break
            else:
                run("near-ring", _near_ring, tw, rng)
                params = _protocol_params(tw, rng)
                if params is not None:
                    run("key-agreement", _protocol, params, rng)
                    run("pke-roundtrip", _pke, params, rng)
        for name in ("derivation-law", "action-law", "orbits", "near-ring", "key-agreement", "pke-roundtrip"):
            if name in tally:
                n, err = tally[name]
                yield SuiteResult(name, F.q, n, err)
                if err:
                    return
