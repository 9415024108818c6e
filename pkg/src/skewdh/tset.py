"""Secrets of the key exchange: W^(u,v) pair-factor products and the set T(X).

Orbit positions are 0-based here: the orbit ``a_1..a_r`` of the text is
``orbit[0..r-1]``.  A pair factor ``P_ij`` (i < j) takes the *generic*
value alpha_ij away from a_i, a_j and the *distinguished* values
alpha^i_ij, alpha^j_ij at them.  Writing D_i for the product of the
distinguished values in row i and G_l for the product of generic values on
pairs through l, membership in W^(u,v) reads

    u_il = D_i * G_l / alpha_il,      v_il = D_l * G_i / alpha_il,

and any member's value vector satisfies V_i * v_il = V_l * u_il.

In *normalized* mode (the default) the generic values of each part form a
public sheet shared by all users, so every member of a part has the same
value vector and T(X) elements differ only by the scalar c0.  *Faithful*
mode gives each element its own generic values (constrained to stay in the
same W^(u,v)); it exists for the identity experiments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .exceptions import (
    ConstraintUnsatisfiable,
    ContextMismatch,
    OrbitTooSmall,
    ZeroDirectionUnavoidable,
)
from .field import FieldElement, FieldParams
from .skew import OrbitContext

NORMALIZED = "normalized"
FAITHFUL = "faithful"
MODES = (NORMALIZED, FAITHFUL)

RESAMPLE_LIMIT = 64


class DegenerateDirectionWarning(UserWarning):
    """Two orbit points carry opposite direction values, so sessions can abort."""


def pair_list(r: int) -> list[tuple[int, int]]:
    """Pairs (i, l), i < l, in the order u_12, ..., u_1r, u_23, ..., u_{r-1,r}."""
    return [(i, l) for i in range(r) for l in range(i + 1, r)]


def _pair_index(r: int) -> dict[tuple[int, int], int]:
    idx = {}
    for n, (i, l) in enumerate(pair_list(r)):
        idx[(i, l)] = idx[(l, i)] = n
    return idx


def _prod(F: FieldParams, values) -> int:
    acc = 1
    for v in values:
        acc = F._mul(acc, v)
    return acc


@dataclass(frozen=True)
class PairFactor:
    i: int
    j: int
    generic: FieldElement
    dist_i: FieldElement
    dist_j: FieldElement

    def __post_init__(self):
        if not 0 <= self.i < self.j:
            raise ValueError(f"pair factor needs i < j, got ({self.i}, {self.j})")
        if not (self.generic and self.dist_i and self.dist_j):
            raise ValueError("pair factor values must be nonzero")

    def value_at(self, k: int) -> FieldElement:
        if k == self.i:
            return self.dist_i
        if k == self.j:
            return self.dist_j
        return self.generic


@dataclass(frozen=True)
class WProfile:
    """The constraint targets u, v in pair order."""

    u: tuple[FieldElement, ...]
    v: tuple[FieldElement, ...]

    def __post_init__(self):
        if len(self.u) != len(self.v):
            raise ValueError("u and v must have equal length")
        if not all(self.u) or not all(self.v):
            raise ValueError("profile entries must be nonzero")

    @property
    def r(self) -> int:
        return (1 + math.isqrt(1 + 8 * len(self.u))) // 2

    def is_symmetric(self) -> bool:
        return self.u == self.v


@dataclass(frozen=True)
class WElement:
    factors: tuple[PairFactor, ...]
    profile: WProfile
    values: tuple[FieldElement, ...]

    @property
    def r(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class TPart:
    """Public data of one summand W^(u^t, v^t): sheet, row products, profile, direction."""

    sheet: tuple[FieldElement, ...]
    row_products: tuple[FieldElement, ...]
    profile: WProfile
    direction: tuple[FieldElement, ...]

    @property
    def r(self) -> int:
        return len(self.row_products)


@dataclass(frozen=True)
class TParams:
    orbit_ctx: OrbitContext
    parts: tuple[TPart, ...]
    d: int
    mode: str = NORMALIZED

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def field(self) -> FieldParams:
        return self.orbit_ctx.twist.field

    @property
    def direction_sum(self) -> tuple[FieldElement, ...]:
        F = self.field
        out = [0] * self.orbit_ctx.r
        for part in self.parts:
            out = [F._add(a, b.value) for a, b in zip(out, part.direction)]
        return tuple(FieldElement(F, v) for v in out)


@dataclass(eq=False)
class TElement:
    """P_0 (P_1 + ... + P_n) restricted to the orbit; c0 is P_0's constant value."""

    orbit_ctx: OrbitContext
    c0: FieldElement
    parts: tuple[WElement, ...]
    values: list[FieldElement]
    erasable: bool = True
    erased: bool = field(default=False)

    def wipe(self) -> None:
        F = self.c0.field
        self.c0 = F.zero
        for k in range(len(self.values)):
            self.values[k] = F.zero
        self.parts = ()
        self.erased = True


# ---------------------------------------------------------------------------
# Derived public data


def _check_r(r: int) -> None:
    if r < 2:
        raise OrbitTooSmall(f"orbit of size {r} has no pairs")


def derive_profile(F: FieldParams, sheet: Sequence[FieldElement], row_products: Sequence[FieldElement]) -> WProfile:
    r = len(row_products)
    _check_r(r)
    pairs = pair_list(r)
    pidx = _pair_index(r)
    a = [x.value for x in sheet]
    g = [_prod(F, (a[pidx[(l, k)]] for k in range(r) if k != l)) for l in range(r)]
    u, v = [], []
    for n, (i, l) in enumerate(pairs):
        ai = F._inv(a[n])
        u.append(FieldElement(F, F._mul(row_products[i].value, F._mul(g[l], ai))))
        v.append(FieldElement(F, F._mul(row_products[l].value, F._mul(g[i], ai))))
    return WProfile(tuple(u), tuple(v))


def derive_direction(F: FieldParams, sheet: Sequence[FieldElement], row_products: Sequence[FieldElement]) -> tuple[FieldElement, ...]:
    """V_k = D_k * (product of generic values on pairs avoiding k)."""
    r = len(row_products)
    # sheet values are nonzero: divide the pairs touching k out of the full product
    total = _prod(F, (x.value for x in sheet))
    touching = [1] * r
    for n, (i, l) in enumerate(pair_list(r)):
        touching[i] = F._mul(touching[i], sheet[n].value)
        touching[l] = F._mul(touching[l], sheet[n].value)
    return tuple(FieldElement(F, F._mul(row_products[k].value, F._mul(total, F._inv(touching[k])))) for k in range(r))


def make_part(F: FieldParams, sheet: Sequence[FieldElement], row_products: Sequence[FieldElement]) -> TPart:
    r = len(row_products)
    _check_r(r)
    if len(sheet) != r * (r - 1) // 2:
        raise ValueError(f"sheet needs {r * (r - 1) // 2} generic values, got {len(sheet)}")
    if not all(sheet) or not all(row_products):
        raise ValueError("sheet and row products must be nonzero")
    sheet, row_products = tuple(sheet), tuple(row_products)
    return TPart(sheet, row_products, derive_profile(F, sheet, row_products), derive_direction(F, sheet, row_products))


def part_from_direction(F: FieldParams, direction: Sequence[FieldElement], sheet: Sequence[FieldElement] | None = None) -> TPart:
    """The part whose members take the values ``direction`` on the orbit."""
    r = len(direction)
    _check_r(r)
    if sheet is None:
        sheet = (F.one,) * (r * (r - 1) // 2)
    unit_rows = make_part(F, sheet, (F.one,) * r).direction
    row_products = tuple(v / w for v, w in zip(direction, unit_rows))
    part = make_part(F, sheet, row_products)
    assert part.direction == tuple(direction)
    return part


def random_part(F: FieldParams, r: int, rng) -> TPart:
    _check_r(r)
    sheet = [F.random_nonzero(rng) for _ in range(r * (r - 1) // 2)]
    rows = [F.random_nonzero(rng) for _ in range(r)]
    return make_part(F, sheet, rows)


def _cancelling_positions(direction: Sequence[FieldElement]) -> tuple[int, int] | None:
    seen: dict[int, int] = {}
    for k, v in enumerate(direction):
        j = seen.get((-v).value)
        if j is not None:
            return j, k
        seen.setdefault(v.value, k)
    return None


def _warn_if_degenerate(direction: Sequence[FieldElement]) -> None:
    hit = _cancelling_positions(direction)
    if hit:
        warnings.warn(
            f"direction values at orbit positions {hit[0]} and {hit[1]} cancel; sessions between them abort",
            DegenerateDirectionWarning,
            stacklevel=3,
        )


def _random_parts(F: FieldParams, r: int, n_parts: int, rng) -> list[TPart]:
    parts: list[TPart] = []
    total = [0] * r
    for _ in range(n_parts):
        for _try in range(RESAMPLE_LIMIT):
            part = random_part(F, r, rng)
            cand = [F._add(a, b.value) for a, b in zip(total, part.direction)]
            if all(cand):
                break
        else:
            raise ZeroDirectionUnavoidable(f"no zero-free direction sum after {RESAMPLE_LIMIT} tries")
        parts.append(part)
        total = cand
    return parts


def t_params_gen(orbit_ctx: OrbitContext, n_parts: int, d: int, rng, mode: str = NORMALIZED) -> TParams:
    """Random public parts with a zero-free direction sum.

    Part sets whose summed direction has cancelling entries are redrawn up to
    RESAMPLE_LIMIT times; if every draw cancels, the last one is kept and a
    DegenerateDirectionWarning is issued.
    """
    r = orbit_ctx.r
    _check_r(r)
    if n_parts < 1:
        raise ValueError("n_parts must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    F = orbit_ctx.twist.field
    for _ in range(RESAMPLE_LIMIT):
        params = TParams(orbit_ctx, tuple(_random_parts(F, r, n_parts, rng)), d, mode)
        if _cancelling_positions(params.direction_sum) is None:
            return params
    _warn_if_degenerate(params.direction_sum)
    return params


def t_params_from_parts(orbit_ctx: OrbitContext, parts: Sequence[TPart], d: int, mode: str = NORMALIZED) -> TParams:
    if not parts:
        raise ValueError("need at least one part")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    for part in parts:
        if part.r != orbit_ctx.r:
            raise ContextMismatch(f"part built for r = {part.r}, orbit has r = {orbit_ctx.r}")
    params = TParams(orbit_ctx, tuple(parts), d, mode)
    if not all(params.direction_sum):
        raise ZeroDirectionUnavoidable("summed direction vanishes at an orbit point")
    _warn_if_degenerate(params.direction_sum)
    return params


def t_params_from_directions(orbit_ctx: OrbitContext, directions, d: int, mode: str = NORMALIZED) -> TParams:
    F = orbit_ctx.twist.field
    return t_params_from_parts(orbit_ctx, [part_from_direction(F, [F(v) for v in vec]) for vec in directions], d, mode)


# ---------------------------------------------------------------------------
# W elements


def w_value_vector(elem: WElement) -> tuple[FieldElement, ...]:
    """Multiply every pair factor's value at each orbit position."""
    r = elem.r if elem.values else elem.profile.r
    F = elem.profile.u[0].field
    # position k sees the generic value of every pair except the r - 1 pairs
    # touching it, where it sees a distinguished value instead
    total = _prod(F, (fac.generic.value for fac in elem.factors))
    dist = [1] * r
    gen = [1] * r
    for fac in elem.factors:
        g = fac.generic.value
        dist[fac.i] = F._mul(dist[fac.i], fac.dist_i.value)
        dist[fac.j] = F._mul(dist[fac.j], fac.dist_j.value)
        gen[fac.i] = F._mul(gen[fac.i], g)
        gen[fac.j] = F._mul(gen[fac.j], g)
    return tuple(FieldElement(F, F._mul(dist[k], F._mul(total, F._inv(gen[k])))) for k in range(r))


def _constraint_products(F: FieldParams, factors: Sequence[PairFactor], r: int):
    """Left-hand sides of the two constraint families, straight from the definition."""
    pidx = _pair_index(r)

    def dist(row, k):
        fac = factors[pidx[(row, k)]]
        return (fac.dist_i if fac.i == row else fac.dist_j).value

    def gen(l, k):
        return factors[pidx[(l, k)]].generic.value

    lhs_u, lhs_v = [], []
    for i, l in pair_list(r):
        du = _prod(F, (dist(i, k) for k in range(r) if k != i))
        gu = _prod(F, (gen(l, k) for k in range(r) if k not in (i, l)))
        dv = _prod(F, (dist(l, k) for k in range(r) if k != l))
        gv = _prod(F, (gen(i, k) for k in range(r) if k not in (i, l)))
        lhs_u.append(F._mul(du, gu))
        lhs_v.append(F._mul(dv, gv))
    return lhs_u, lhs_v


def w_membership_check(elem: WElement, profile: WProfile) -> bool:
    r = profile.r
    if len(elem.factors) != len(profile.u):
        return False
    F = profile.u[0].field
    lhs_u, lhs_v = _constraint_products(F, elem.factors, r)
    return lhs_u == [x.value for x in profile.u] and lhs_v == [x.value for x in profile.v]


def _split_rows(F: FieldParams, row_products: Sequence[int], r: int, rng) -> list[dict[int, int]]:
    """For each row i pick alpha^i_ik (k != i) with product D_i: r-2 free draws, one forced."""
    # the forced value D_i / prod(free) is nonzero because every factor is
    free_all = rng.integers(1, F.q, size=(r, r - 2)).tolist()
    rows = []
    for i in range(r):
        others = [k for k in range(r) if k != i]
        free = free_all[i]
        if not row_products[i]:
            raise ConstraintUnsatisfiable(f"row {i}: row product is 0")
        forced = F._mul(row_products[i], F._inv(_prod(F, free)))
        rows.append(dict(zip(others, free + [forced])))
    return rows


def _assemble(F: FieldParams, r: int, generics: Sequence[int], rows: list[dict[int, int]], profile: WProfile, verify: bool) -> WElement:
    factors = tuple(
        PairFactor(i, l, FieldElement(F, generics[n]), FieldElement(F, rows[i][l]), FieldElement(F, rows[l][i]))
        for n, (i, l) in enumerate(pair_list(r))
    )
    elem = WElement(factors, profile, ())
    if verify and not w_membership_check(elem, profile):
        raise ConstraintUnsatisfiable("sampled element violates its own profile")
    return WElement(factors, profile, w_value_vector(elem))


def w_sample(part: TPart, rng, verify: bool = False) -> WElement:
    """A member of W^(u,v) on the part's public sheet; only the row splits are random.

    ``verify`` re-checks the constraints on the result (costs about as much as sampling).
    """
    r = part.r
    _check_r(r)
    F = part.profile.u[0].field
    rows = _split_rows(F, [x.value for x in part.row_products], r, rng)
    return _assemble(F, r, [x.value for x in part.sheet], rows, part.profile, verify)


def _root_of_unity(F: FieldParams, n: int, rng) -> int:
    # uniform element of {x : x^n = 1}
    g = math.gcd(n, F.q - 1)
    y = int(rng.integers(1, F.q))
    return F._pow(y, (F.q - 1) // g)


def w_sample_faithful(part: TPart, rng, verify: bool = False) -> WElement:
    """A member of the same W^(u,v) with privately drawn generic values.

    Generic values are rescaled by gamma_jk.  Staying in W^(u,v) needs the
    product of gamma over pairs through l avoiding i to be independent of l;
    for r = 3 any gamma works, otherwise we use gamma_jk = eta*z_j*z_k with
    z_j^(r-3) = 1, which satisfies that condition for every r.
    """
    r = part.r
    _check_r(r)
    F = part.profile.u[0].field
    pairs = pair_list(r)
    pidx = _pair_index(r)
    if r <= 3:
        gamma = [int(rng.integers(1, F.q)) for _ in pairs]
    else:
        eta = int(rng.integers(1, F.q))
        z = [_root_of_unity(F, r - 3, rng) for _ in range(r)]
        gamma = [F._mul(eta, F._mul(z[i], z[l])) for i, l in pairs]
    generics = [F._mul(a.value, g) for a, g in zip(part.sheet, gamma)]
    rows = []
    for i in range(r):
        l = 1 if i == 0 else 0
        scale = _prod(F, (gamma[pidx[(l, k)]] for k in range(r) if k not in (i, l)))
        rows.append(F._mul(part.row_products[i].value, F._inv(scale)))
    return _assemble(F, r, generics, _split_rows(F, rows, r, rng), part.profile, verify)


# ---------------------------------------------------------------------------
# T(X)


def t_sample(tparams: TParams, rng, c0: FieldElement | None = None) -> TElement:
    F = tparams.field
    if c0 is None:
        c0 = F.random_nonzero(rng)
    elif not c0:
        raise ValueError("c0 must be nonzero")
    sampler = w_sample if tparams.mode == NORMALIZED else w_sample_faithful
    parts = tuple(sampler(part, rng) for part in tparams.parts)
    total = [0] * tparams.orbit_ctx.r
    for w in parts:
        total = [F._add(a, b.value) for a, b in zip(total, w.values)]
    values = [FieldElement(F, F._mul(c0.value, s)) for s in total]
    if not all(values):
        raise ZeroDirectionUnavoidable("sampled secret vanishes at an orbit point")
    return TElement(tparams.orbit_ctx, c0, parts, values)


def t_value_at(elem: TElement, x: FieldElement) -> FieldElement:
    return elem.values[elem.orbit_ctx.position(x)]


def _same_context(a: OrbitContext, b: OrbitContext) -> bool:
    return a is b or (a.twist == b.twist and a.orbit == b.orbit)


def cross_commutation_check(P: TElement, Q: TElement) -> bool:
    """P(a_i) Q(a_l) == P(a_l) Q(a_i) for every pair of orbit positions."""
    if not _same_context(P.orbit_ctx, Q.orbit_ctx):
        raise ContextMismatch("elements live on different orbits")
    return vectors_cross_commute(P.values, Q.values)


def vectors_cross_commute(x: Sequence[FieldElement], y: Sequence[FieldElement]) -> bool:
    r = len(x)
    return all(x[i] * y[l] == x[l] * y[i] for i in range(r) for l in range(i + 1, r))


# ---------------------------------------------------------------------------
# Sum / product identity experiment


@dataclass
class IdentityReport:
    mode: str
    r: int
    trials: int
    sum_violations: int = 0
    product_violations: int = 0
    first_sum_counterexample: dict | None = None
    first_product_counterexample: dict | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _first_violation(x, y):
    r = len(x)
    for i in range(r):
        for l in range(i + 1, r):
            if x[i] * y[l] != x[l] * y[i]:
                return i, l
    return None


def sum_product_identity_experiment(orbit_ctx: OrbitContext, mode: str, budget: int, rng) -> IdentityReport:
    """Sample P, Q from one profile and R, S from another; test both identities."""
    r = orbit_ctx.r
    _check_r(r)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    F = orbit_ctx.twist.field
    sampler = w_sample if mode == NORMALIZED else w_sample_faithful
    first, second = random_part(F, r, rng), random_part(F, r, rng)
    report = IdentityReport(mode, r, budget)
    for _ in range(budget):
        P, Q = sampler(first, rng), sampler(first, rng)
        R, S = sampler(second, rng), sampler(second, rng)
        pr = [a + b for a, b in zip(P.values, R.values)]
        qs = [a + b for a, b in zip(Q.values, S.values)]
        hit = _first_violation(pr, qs)
        if hit:
            report.sum_violations += 1
            if report.first_sum_counterexample is None:
                report.first_sum_counterexample = _record(hit, P, Q, R, S)
        pr = [a * b for a, b in zip(P.values, R.values)]
        qs = [a * b for a, b in zip(Q.values, S.values)]
        hit = _first_violation(pr, qs)
        if hit:
            report.product_violations += 1
            if report.first_product_counterexample is None:
                report.first_product_counterexample = _record(hit, P, Q, R, S)
    return report


def _record(hit, P, Q, R, S) -> dict:
    return {
        "i": hit[0],
        "l": hit[1],
        **{name: [x.value for x in w.values] for name, w in zip("PQRS", (P, Q, R, S))},
    }
