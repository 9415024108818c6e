"""Exact arithmetic in GF(p^m).

Elements are polynomials in an adjoined root ``t`` of a monic irreducible
``modulus`` over GF(p), stored as their canonical integer encoding
``val(x) = sum(coeffs[i] * p**i)``.  The encoding doubles as the canonical
element order used for orbit indexing.

For q up to ``TABLE_LIMIT`` multiplication and addition run through
exp/log/Zech-log tables built once per field from the plain polynomial
routines; larger fields fall back to those routines directly.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

from .exceptions import (
    BadLength,
    CoefficientOutOfRange,
    NotMonic,
    NotPrime,
    ParamsMismatch,
    Reducible,
    TooLarge,
    ZeroInverse,
)

MAX_P = 1 << 16
MAX_M = 16
TABLE_LIMIT = 1 << 16
ENUM_LIMIT = 1 << 20
# trial division is used while the number of candidate divisors stays below this
BRUTE_DIVISOR_LIMIT = 1 << 18


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Polynomials over GF(p) as ascending coefficient lists, [] is zero.


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], f: Sequence[int], p: int) -> list[int]:
    """Remainder of a modulo the monic polynomial f."""
    a = [c % p for c in a]
    n = len(f) - 1
    for i in range(len(a) - 1, n - 1, -1):
        c = a[i]
        if c:
            base = i - n
            for j in range(n + 1):
                a[base + j] = (a[base + j] - c * f[j]) % p
    return _trim(a[:n])


def _prem(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    """Remainder for an arbitrary nonzero divisor b."""
    b = _trim(list(b))
    inv_lead = pow(b[-1], p - 2, p)
    monic = [c * inv_lead % p for c in b]
    return _pmod(a, monic, p)


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _psub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _prem(a, b, p)
    return a


def _powmod_x(e: int, f: Sequence[int], p: int) -> list[int]:
    """X**e mod f by square-and-multiply."""
    result = [1]
    base = _pmod([0, 1], f, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return result


def is_irreducible_bruteforce(modulus: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..m//2."""
    m = len(modulus) - 1
    if m <= 0:
        return False
    for k in range(1, m // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            if not _pmod(modulus, list(low) + [1], p):
                return False
    return True


def is_irreducible_benor(modulus: Sequence[int], p: int) -> bool:
    """Ben-Or test: gcd(X^(p^i) - X, f) = 1 for every i <= m/2."""
    m = len(modulus) - 1
    if m <= 0:
        return False
    for i in range(1, m // 2 + 1):
        h = _psub(_powmod_x(p**i, modulus, p), [0, 1], p)
        if len(_pgcd(modulus, h, p)) > 1:
            return False
    return True


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    m = len(modulus) - 1
    divisors = sum(p**k for k in range(1, m // 2 + 1))
    if divisors <= BRUTE_DIVISOR_LIMIT:
        return is_irreducible_bruteforce(modulus, p)
    return is_irreducible_benor(modulus, p)


def find_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree m, ordered by the encoding of its low coefficients."""
    for n in range(p**m):
        low = [(n // p**i) % p for i in range(m)]
        cand = low + [1]
        if is_irreducible(cand, p):
            return tuple(cand)
    raise Reducible(f"no irreducible polynomial of degree {m} over GF({p})")  # unreachable


# ---------------------------------------------------------------------------


class _Tables:
    """exp/log/Zech tables for a field with q <= TABLE_LIMIT."""

    __slots__ = ("exp", "log", "zech", "order", "neg_one_log")

    def __init__(self, params: FieldParams):
        q, p = params.q, params.p
        n = q - 1
        self.order = n
        if n == 1:
            # GF(2): the multiplicative group is trivial
            self.exp = [1]
            self.log = [0, 0]
            self.zech = [-1]
            self.neg_one_log = 0
            return
        factors = _prime_factors(n)
        g = None
        for cand in range(2, q):
            if all(params._pow_slow(cand, n // f) != 1 for f in factors):
                g = cand
                break
        assert g is not None
        exp = [0] * n
        log = [0] * q
        x = 1
        for k in range(n):
            exp[k] = x
            log[x] = k
            x = params._mul_slow(x, g)
        self.exp = exp
        self.log = log
        zech = [-1] * n
        for k in range(n):
            s = params._add_slow(exp[k], 1)
            zech[k] = log[s] if s else -1
        self.zech = zech
        self.neg_one_log = 0 if p == 2 else n // 2


@dataclass(frozen=True)
class FieldParams:
    """GF(p^m) defined by a monic irreducible modulus (ascending coefficients)."""

    p: int
    m: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.m

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.m})"

    # -- element construction ------------------------------------------------

    def __call__(self, value) -> FieldElement:
        if isinstance(value, FieldElement):
            if value.field != self:
                raise ParamsMismatch(f"{value!r} is not in {self!r}")
            return value
        if isinstance(value, int):
            if self.m == 1:
                return FieldElement(self, value % self.p)
            if not 0 <= value < self.q:
                raise CoefficientOutOfRange(f"encoding {value} outside [0, {self.q})")
            return FieldElement(self, value)
        coeffs = list(value)
        if len(coeffs) > self.m:
            raise BadLength(f"expected at most {self.m} coefficients, got {len(coeffs)}")
        for c in coeffs:
            if not 0 <= c < self.p:
                raise CoefficientOutOfRange(f"coefficient {c} not in [0, {self.p})")
        return FieldElement(self, self.from_coeffs(coeffs))

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, 1)

    @property
    def t(self) -> FieldElement:
        """The adjoined root of the modulus."""
        return FieldElement(self, self.p if self.m > 1 else (-self.modulus[0]) % self.p)

    def elements(self) -> list[FieldElement]:
        if self.q > ENUM_LIMIT:
            raise TooLarge(f"q = {self.q} exceeds enumeration guard {ENUM_LIMIT}")
        return [FieldElement(self, v) for v in range(self.q)]

    def nonzero_elements(self) -> list[FieldElement]:
        return self.elements()[1:]

    def random_element(self, rng) -> FieldElement:
        return FieldElement(self, int(rng.integers(0, self.q)))

    def random_nonzero(self, rng) -> FieldElement:
        return FieldElement(self, int(rng.integers(1, self.q)))

    # -- integer-level helpers -------------------------------------------------

    def to_coeffs(self, v: int) -> tuple[int, ...]:
        p = self.p
        out = []
        for _ in range(self.m):
            v, r = divmod(v, p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        v = 0
        for c in reversed(coeffs):
            v = v * self.p + c
        return v

    @cached_property
    def _tables(self) -> _Tables | None:
        if self.q > TABLE_LIMIT:
            return None
        return _Tables(self)

    # reference routines: plain polynomial arithmetic, used to build the tables
    def _add_slow(self, x: int, y: int) -> int:
        if self.p == 2:
            return x ^ y
        a, b = self.to_coeffs(x), self.to_coeffs(y)
        return self.from_coeffs([(u + w) % self.p for u, w in zip(a, b)])

    def _neg_slow(self, x: int) -> int:
        if self.p == 2:
            return x
        return self.from_coeffs([(-c) % self.p for c in self.to_coeffs(x)])

    def _mul_slow(self, x: int, y: int) -> int:
        prod = _pmul(_trim(list(self.to_coeffs(x))), _trim(list(self.to_coeffs(y))), self.p)
        return self.from_coeffs(_pmod(prod, self.modulus, self.p))

    def _pow_slow(self, x: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_slow(result, x)
            x = self._mul_slow(x, x)
            e >>= 1
        return result

    def _add(self, x: int, y: int) -> int:
        if self.p == 2:
            return x ^ y
        tb = self._tables
        if tb is None:
            return self._add_slow(x, y)
        if x == 0:
            return y
        if y == 0:
            return x
        lx, ly = tb.log[x], tb.log[y]
        z = tb.zech[(ly - lx) % tb.order]
        if z < 0:
            return 0
        return tb.exp[(lx + z) % tb.order]

    def _neg(self, x: int) -> int:
        if self.p == 2 or x == 0:
            return x
        tb = self._tables
        if tb is None:
            return self._neg_slow(x)
        return tb.exp[(tb.log[x] + tb.neg_one_log) % tb.order]

    def _mul(self, x: int, y: int) -> int:
        if x == 0 or y == 0:
            return 0
        tb = self._tables
        if tb is None:
            return self._mul_slow(x, y)
        return tb.exp[(tb.log[x] + tb.log[y]) % tb.order]

    def _inv(self, x: int) -> int:
        if x == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        tb = self._tables
        if tb is None:
            return self._pow_slow(x, self.q - 2)
        return tb.exp[(-tb.log[x]) % tb.order]

    def _pow(self, x: int, e: int) -> int:
        if e < 0:
            return self._pow(self._inv(x), -e)
        if e == 0:
            return 1
        if x == 0:
            return 0
        tb = self._tables
        if tb is None:
            return self._pow_slow(x, e)
        return tb.exp[(tb.log[x] * e) % tb.order]


@dataclass(frozen=True, slots=True, eq=False)
class FieldElement:
    """An element of GF(p^m); ``value`` is the canonical integer encoding."""

    field: FieldParams
    value: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.to_coeffs(self.value)

    def _check(self, other) -> FieldParams:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        f = self.field
        if other.field is not f and other.field != f:
            raise ParamsMismatch(f"{f!r} vs {other.field!r}")
        return f

    def __eq__(self, other) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.value == other.value and (self.field is other.field or self.field == other.field)

    def __hash__(self) -> int:
        return hash((self.field.p, self.field.m, self.value))

    def __lt__(self, other: FieldElement) -> bool:
        self._check(other)
        return self.value < other.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __add__(self, other: FieldElement) -> FieldElement:
        f = self._check(other)
        return FieldElement(f, f._add(self.value, other.value))

    def __sub__(self, other: FieldElement) -> FieldElement:
        f = self._check(other)
        return FieldElement(f, f._add(self.value, f._neg(other.value)))

    def __neg__(self) -> FieldElement:
        return FieldElement(self.field, self.field._neg(self.value))

    def __mul__(self, other: FieldElement) -> FieldElement:
        f = self._check(other)
        return FieldElement(f, f._mul(self.value, other.value))

    def __truediv__(self, other: FieldElement) -> FieldElement:
        f = self._check(other)
        return FieldElement(f, f._mul(self.value, f._inv(other.value)))

    def __pow__(self, e: int) -> FieldElement:
        return FieldElement(self.field, self.field._pow(self.value, e))

    def inverse(self) -> FieldElement:
        return FieldElement(self.field, self.field._inv(self.value))

    def frobenius(self, s: int = 1) -> FieldElement:
        return self ** (self.field.p**s)

    def encode(self) -> bytes:
        return b"".join(c.to_bytes(2, "little") for c in self.coeffs)

    def __repr__(self) -> str:
        if self.field.m == 1:
            return str(self.value)
        terms = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if not c:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(terms) or "0"


# ---------------------------------------------------------------------------
# Functional API


def make_field(p: int, m: int, modulus_poly: Sequence[int]) -> FieldParams:
    """Validate (p, m, modulus) and return the field parameters.

    Raises NotPrime, NotMonic or Reducible.
    """
    if not is_prime(p) or p >= MAX_P:
        raise NotPrime(f"p = {p} must be a prime below 2^16")
    if not 1 <= m <= MAX_M:
        raise BadLength(f"extension degree m = {m} outside [1, {MAX_M}]")
    coeffs = [int(c) for c in modulus_poly]
    if len(coeffs) != m + 1:
        raise BadLength(f"modulus needs {m + 1} coefficients, got {len(coeffs)}")
    if any(not 0 <= c < p for c in coeffs):
        raise CoefficientOutOfRange("modulus coefficients must be residues mod p")
    if coeffs[-1] != 1:
        raise NotMonic("modulus must be monic")
    if not is_irreducible(coeffs, p):
        raise Reducible(f"{coeffs} is reducible over GF({p})")
    return FieldParams(p, m, tuple(coeffs))


@functools.cache
def GF(p: int, m: int = 1) -> FieldParams:
    """GF(p^m) with the smallest monic irreducible modulus."""
    return make_field(p, m, find_irreducible(p, m))


def add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def sub(x: FieldElement, y: FieldElement) -> FieldElement:
    return x - y


def mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def neg(x: FieldElement) -> FieldElement:
    return -x


def inv(x: FieldElement) -> FieldElement:
    return x.inverse()


def power(x: FieldElement, e: int) -> FieldElement:
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    return x**e


def frobenius(x: FieldElement, s: int) -> FieldElement:
    if not 0 <= s < x.field.m:
        raise ValueError(f"Frobenius exponent {s} outside [0, {x.field.m})")
    return x.frobenius(s)


def enumerate_field(params: FieldParams) -> list[FieldElement]:
    return params.elements()


def iter_field(params: FieldParams) -> Iterator[FieldElement]:
    if params.q > ENUM_LIMIT:
        raise TooLarge(f"q = {params.q} exceeds enumeration guard")
    return (FieldElement(params, v) for v in range(params.q))


def encode(x: FieldElement) -> bytes:
    return x.encode()


def decode(params: FieldParams, data: bytes) -> FieldElement:
    if len(data) != 2 * params.m:
        raise BadLength(f"expected {2 * params.m} bytes, got {len(data)}")
    coeffs = [int.from_bytes(data[2 * i : 2 * i + 2], "little") for i in range(params.m)]
    for c in coeffs:
        if c >= params.p:
            raise CoefficientOutOfRange(f"coefficient {c} >= p = {params.p}")
    return FieldElement(params, params.from_coeffs(coeffs))
