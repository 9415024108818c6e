"""The (sigma, delta) twist over GF(q) and the machinery built on it.

sigma is the Frobenius power x -> x^(p^s) and delta the inner
sigma-derivation x -> beta*(sigma(x) - x).  From these we get

* the conjugation action  phi(c, b) = sigma(c) b c^-1 + delta(c) c^-1  of
  K* on K, and its orbits (conjugacy classes);
* functions K -> K tabulated as :class:`PointFunction`, the left skew
  product ``f * g`` and the action ``psi(f, b) = phi(f(b), b)``;
* skew polynomials with Ore multiplication ``X c = sigma(c) X + delta(c)``
  and the norm-based evaluation that ties them to the skew product.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

from .exceptions import NotInOrbit, ZeroActor, ZeroValue
from .field import FieldElement, FieldParams


@dataclass(frozen=True)
class Twist:
    """sigma = Frobenius^s, delta = beta * (sigma - id)."""

    field: FieldParams
    s: int
    beta: FieldElement

    def __post_init__(self):
        if not 0 <= self.s < self.field.m:
            raise ValueError(f"Frobenius exponent s = {self.s} outside [0, {self.field.m})")
        if self.beta.field != self.field:
            raise ValueError("beta must live in the twist's field")

    @property
    def sigma_exponent(self) -> int:
        return self.field.p**self.s

    def sigma(self, x: FieldElement) -> FieldElement:
        return x**self.sigma_exponent

    def delta(self, x: FieldElement) -> FieldElement:
        return self.beta * (self.sigma(x) - x)

    # integer-level fast paths, used by phi and the orbit code
    def _sigma_int(self, x: int) -> int:
        return self.field._pow(x, self.sigma_exponent)

    def _phi_int(self, c: int, b: int) -> int:
        F = self.field
        sc = F._pow(c, self.sigma_exponent)
        ci = F._inv(c)
        d = F._mul(self.beta.value, F._add(sc, F._neg(c)))
        return F._add(F._mul(F._mul(sc, b), ci), F._mul(d, ci))

    def phi(self, c: FieldElement, b: FieldElement) -> FieldElement:
        if not c:
            raise ZeroActor("phi(c, b) needs c != 0")
        return FieldElement(self.field, self._phi_int(c.value, b.value))


def sigma(tw: Twist, x: FieldElement) -> FieldElement:
    return tw.sigma(x)


def delta(tw: Twist, x: FieldElement) -> FieldElement:
    return tw.delta(x)


def phi(tw: Twist, c: FieldElement, b: FieldElement) -> FieldElement:
    """sigma(c) * b * c^-1 + delta(c) * c^-1."""
    return tw.phi(c, b)


# ---------------------------------------------------------------------------
# Orbits


@dataclass(frozen=True)
class OrbitContext:
    """Ordered conjugacy class of a base point: base first, then ascending encoding."""

    twist: Twist
    base: FieldElement
    orbit: tuple[FieldElement, ...]
    index: Mapping[FieldElement, int] = field(repr=False, compare=False)

    @property
    def r(self) -> int:
        return len(self.orbit)

    def __contains__(self, x: FieldElement) -> bool:
        return x in self.index

    def position(self, x: FieldElement) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise NotInOrbit(f"{x!r} is not in the orbit of {self.base!r}") from None


def orbit_values(tw: Twist, a: FieldElement) -> set[int]:
    F = tw.field
    return {tw._phi_int(c, a.value) for c in range(1, F.q)}


def conjugacy_class(tw: Twist, a: FieldElement) -> OrbitContext:
    members = orbit_values(tw, a)
    members.discard(a.value)
    ordered = (a,) + tuple(FieldElement(tw.field, v) for v in sorted(members))
    return OrbitContext(tw, a, ordered, {x: i for i, x in enumerate(ordered)})


def orbit_partition(tw: Twist) -> list[OrbitContext]:
    """All conjugacy classes, each keyed by its smallest member."""
    seen: set[int] = set()
    out = []
    for x in tw.field.elements():
        if x.value in seen:
            continue
        ctx = conjugacy_class(tw, x)
        seen.update(y.value for y in ctx.orbit)
        out.append(ctx)
    return out


def orbit_size_formula(tw: Twist, b: FieldElement) -> int:
    """(q-1)/gcd(p^s-1, q-1) away from the fixed point -beta, 1 at it."""
    if b == -tw.beta:
        return 1
    q = tw.field.q
    return (q - 1) // math.gcd(tw.sigma_exponent - 1, q - 1)


# ---------------------------------------------------------------------------
# Tabulated functions


@dataclass(frozen=True)
class PointFunction:
    """A total function K -> K stored as a table indexed by canonical encoding."""

    field: FieldParams
    table: tuple[FieldElement, ...]

    def __post_init__(self):
        if len(self.table) != self.field.q:
            raise ValueError(f"table must have {self.field.q} entries")

    def __call__(self, x: FieldElement) -> FieldElement:
        return self.table[x.value]

    def __add__(self, other: PointFunction) -> PointFunction:
        return pointwise_add(self, other)

    @classmethod
    def const(cls, F: FieldParams, c: FieldElement) -> PointFunction:
        return cls(F, (c,) * F.q)

    @classmethod
    def identity(cls, F: FieldParams) -> PointFunction:
        return cls(F, tuple(F.elements()))

    @classmethod
    def from_callable(cls, F: FieldParams, fn: Callable[[FieldElement], FieldElement]) -> PointFunction:
        return cls(F, tuple(fn(x) for x in F.elements()))

    @classmethod
    def from_mapping(cls, F: FieldParams, values: Mapping[FieldElement, FieldElement]) -> PointFunction:
        """Unlisted points map to 0."""
        return cls(F, tuple(values.get(x, F.zero) for x in F.elements()))

    @classmethod
    def from_values(cls, F: FieldParams, values: Iterable[int]) -> PointFunction:
        return cls(F, tuple(FieldElement(F, int(v)) for v in values))

    def is_nowhere_zero(self) -> bool:
        return all(self.table)


def pointwise_add(f: PointFunction, g: PointFunction) -> PointFunction:
    return PointFunction(f.field, tuple(a + b for a, b in zip(f.table, g.table)))


def skew_product(tw: Twist, f: PointFunction, g: PointFunction) -> PointFunction:
    """(f * g)(x) = f(phi(g(x), x)) g(x), and 0 where g(x) = 0."""
    F = tw.field
    out = []
    for x, gx in zip(F.elements(), g.table):
        if gx:
            out.append(f(tw.phi(gx, x)) * gx)
        else:
            out.append(F.zero)
    return PointFunction(F, tuple(out))


def psi(tw: Twist, f: PointFunction, b: FieldElement) -> FieldElement:
    fb = f(b)
    if not fb:
        raise ZeroValue(f"psi(f, b) undefined: f({b!r}) = 0")
    return tw.phi(fb, b)


class LeftDistribWitness(NamedTuple):
    f: PointFunction
    g: PointFunction
    h: PointFunction
    x: FieldElement
    lhs: FieldElement
    rhs: FieldElement


def _left_distrib_sides(tw, f, g, h, x):
    lhs = skew_product(tw, f, g + h)(x)
    rhs = (skew_product(tw, f, g) + skew_product(tw, f, h))(x)
    return lhs, rhs


def find_left_distrib_counterexample(tw: Twist, budget: int = 10_000, rng=None) -> LeftDistribWitness | None:
    """Search for f, g, h, x with (f*(g+h))(x) != (f*g + f*h)(x).

    For q <= 16 the search is exhaustive.  (f*g)(x) only depends on g(x), so
    constant g, h lose nothing; for fixed (x, g(x), h(x)) the defect is a
    linear form in at most three values of f, and a witness exists iff one
    of its coefficients is nonzero (take f the indicator of that point).
    Larger fields fall back to ``budget`` random trials.
    """
    F = tw.field
    if F.q <= 16:
        els = F.elements()
        for x, gx, hx in itertools.product(els, repeat=3):
            coeff: dict[int, FieldElement] = {}

            def acc(point, c):
                coeff[point.value] = coeff.get(point.value, F.zero) + c

            if gx + hx:
                acc(tw.phi(gx + hx, x), gx + hx)
            if gx:
                acc(tw.phi(gx, x), -gx)
            if hx:
                acc(tw.phi(hx, x), -hx)
            hits = sorted(v for v, c in coeff.items() if c)
            if not hits:
                continue
            f = PointFunction.from_mapping(F, {FieldElement(F, hits[0]): F.one})
            g, h = PointFunction.const(F, gx), PointFunction.const(F, hx)
            lhs, rhs = _left_distrib_sides(tw, f, g, h, x)
            assert lhs != rhs
            return LeftDistribWitness(f, g, h, x, lhs, rhs)
        return None
    if rng is None:
        raise ValueError("randomized search needs an rng")
    for _ in range(budget):
        f, g, h = (PointFunction.from_values(F, rng.integers(0, F.q, size=F.q)) for _ in range(3))
        x = F.random_element(rng)
        lhs, rhs = _left_distrib_sides(tw, f, g, h, x)
        if lhs != rhs:
            return LeftDistribWitness(f, g, h, x, lhs, rhs)
    return None


# ---------------------------------------------------------------------------
# Skew polynomials


@dataclass(frozen=True)
class SkewPolynomial:
    """Ascending coefficients with no trailing zero; () is the zero polynomial."""

    field: FieldParams
    coeffs: tuple[FieldElement, ...]

    def __post_init__(self):
        if self.coeffs and not self.coeffs[-1]:
            raise ValueError("trailing zero coefficient; use SkewPolynomial.of")

    @classmethod
    def of(cls, F: FieldParams, coeffs: Sequence) -> SkewPolynomial:
        cs = [F(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        return cls(F, tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: SkewPolynomial) -> SkewPolynomial:
        return skew_poly_add(self, other)


def skew_poly_add(f: SkewPolynomial, g: SkewPolynomial) -> SkewPolynomial:
    F = f.field
    n = max(len(f.coeffs), len(g.coeffs))
    a = f.coeffs + (F.zero,) * (n - len(f.coeffs))
    b = g.coeffs + (F.zero,) * (n - len(g.coeffs))
    return SkewPolynomial.of(F, [x + y for x, y in zip(a, b)])


def _x_times(tw: Twist, h: list[FieldElement]) -> list[FieldElement]:
    # X * sum h_j X^j = sum sigma(h_j) X^(j+1) + delta(h_j) X^j
    F = tw.field
    out = [F.zero] * (len(h) + 1)
    for j, c in enumerate(h):
        out[j + 1] = out[j + 1] + tw.sigma(c)
        out[j] = out[j] + tw.delta(c)
    return out


def skew_poly_mul(tw: Twist, f: SkewPolynomial, g: SkewPolynomial) -> SkewPolynomial:
    """Ore product with X c = sigma(c) X + delta(c)."""
    F = tw.field
    if not f.coeffs or not g.coeffs:
        return SkewPolynomial(F, ())
    result = [F.zero] * (len(f.coeffs) + len(g.coeffs) - 1)
    power = list(g.coeffs)  # X^i * g
    for i, a in enumerate(f.coeffs):
        if i:
            power = _x_times(tw, power)
        for j, c in enumerate(power):
            result[j] = result[j] + a * c
    return SkewPolynomial.of(F, result)


def skew_norm(tw: Twist, k: int, b: FieldElement) -> FieldElement:
    """N_0(b) = 1, N_{k+1}(b) = sigma(N_k(b)) b + delta(N_k(b))."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = tw.field.one
    for _ in range(k):
        n = tw.sigma(n) * b + tw.delta(n)
    return n


def skew_eval(tw: Twist, poly: SkewPolynomial, b: FieldElement) -> FieldElement:
    F = tw.field
    total = F.zero
    n = F.one
    for k, c in enumerate(poly.coeffs):
        if k:
            n = tw.sigma(n) * b + tw.delta(n)
        total = total + c * n
    return total


def poly_to_fn(tw: Twist, poly: SkewPolynomial) -> PointFunction:
    F = tw.field
    return PointFunction(F, tuple(skew_eval(tw, poly, x) for x in F.elements()))
