"""Attack games for the action, the authenticated-links oracle harness, and
empirical advantage estimates.

Every trial draws its randomness from ``np.random.default_rng([seed, tag, ...,
trial])``, so a (seed, trial) pair pins the whole transcript of that trial
regardless of how many trials run or in which order.

Search games (SAP, CGSAP) report the win rate and its excess over the 1/r
baseline of guessing a uniform orbit point.  The decisional game reports
|Pr[W_0] - Pr[W_1]| where W_b is "the adversary outputs 1 in experiment b".
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import binomtest

from .exceptions import (
    DegenerateSession,
    DoubleTest,
    GuardError,
    InjectionRefused,
    OracleError,
    ProtocolError,
    SkewDHError,
    TestOnExposedSession,
)
from .field import FieldElement
from .protocol import (
    SID_LEN,
    DomainParams,
    InitMessage,
    RespMessage,
    SessionInstance,
    _fresh_secret,
    decode_message,
    finalize,
    handshake,
    initiate,
    power_sum,
    public_value,
    respond,
)
from .skew import PointFunction, psi
from .tset import NORMALIZED, TElement
from .wire import params_digest

BRUTE_FORCE_LIMIT = 1 << 12
REDRAW_LIMIT = 256

TAG_SAP, TAG_CGSAP, TAG_DGSAP, TAG_SK, TAG_REDUCTION = 1, 2, 3, 4, 5


def trial_rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, *stream])


# ---------------------------------------------------------------------------
# Statistics


def wilson(k: int, n: int, confidence: float) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def newcombe(k0: int, n0: int, k1: int, n1: int, confidence: float) -> tuple[float, float, float]:
    """Difference p0 - p1 with the Newcombe hybrid score interval."""
    p0, p1 = k0 / n0, k1 / n1
    l0, u0 = wilson(k0, n0, confidence)
    l1, u1 = wilson(k1, n1, confidence)
    d = p0 - p1
    return d, d - math.hypot(p0 - l0, u1 - p1), d + math.hypot(u0 - p0, p1 - l1)


def abs_interval(lo: float, hi: float) -> tuple[float, float]:
    """Image of [lo, hi] under |x|."""
    if lo <= 0 <= hi:
        return 0.0, max(-lo, hi)
    return min(abs(lo), abs(hi)), max(abs(lo), abs(hi))


# ---------------------------------------------------------------------------
# Config and reports


@dataclass(frozen=True)
class GameConfig:
    params: DomainParams
    trials: int
    seed: int
    confidence: float = 0.99

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")


@dataclass
class AdvantageReport:
    game: str
    adversary: str
    trials: int
    estimate: float
    ci_lo: float
    ci_hi: float
    seed: int
    params_digest: str
    confidence: float
    wins: int | None = None
    w0: int | None = None
    w1: int | None = None
    rate: float | None = None
    baseline: float | None = None
    signed: tuple[float, float, float] | None = None
    redraws: int = 0
    extra: dict = field(default_factory=dict)
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if v is not None and k != "wall_time"}
        if not doc.get("extra"):
            doc.pop("extra", None)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))


def _digest(params: DomainParams) -> str:
    return params_digest(params).hex()


def _search_report(game, adversary, cfg: GameConfig, wins, baseline, redraws, started) -> AdvantageReport:
    n = cfg.trials
    lo, hi = wilson(wins, n, cfg.confidence)
    return AdvantageReport(
        game=game,
        adversary=adversary,
        trials=n,
        estimate=wins / n - baseline,
        ci_lo=lo - baseline,
        ci_hi=hi - baseline,
        seed=cfg.seed,
        params_digest=_digest(cfg.params),
        confidence=cfg.confidence,
        wins=wins,
        rate=wins / n,
        baseline=baseline,
        redraws=redraws,
        wall_time=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Challenger helpers


def honest_exchange(params: DomainParams, rng) -> tuple[FieldElement, FieldElement, FieldElement, int]:
    """(pk_1, pk_2, key, redraws) of a complete honest run; degenerate runs are redrawn."""
    for redraws in range(REDRAW_LIMIT):
        try:
            ii, ij = handshake(params, rng, "U1", "U2", bytes(SID_LEN))
        except DegenerateSession:
            continue
        return ii.own_pk, ij.own_pk, ij.sk, redraws
    raise DegenerateSession(f"no complete run in {REDRAW_LIMIT} draws")


def random_session_key(params: DomainParams, rng, kind: str = "orbit") -> FieldElement:
    """psi(S, a) for a fresh S in T(X) ("orbit"), or a uniform field element ("uniform")."""
    if kind == "uniform":
        return params.field.random_element(rng)
    if kind != "orbit":
        raise ValueError(f"unknown random-key kind {kind!r}")
    return public_value(params, _fresh_secret(params, rng, None))


# ---------------------------------------------------------------------------
# Adversaries


class BruteForce:
    """Recovers a secret's scalar by tabulating phi(c, a) over all c in K^*.

    In normalized mode a secret is c0 times the public direction on the orbit,
    so the scalar behind a public value is all an attacker needs.  Refused
    for q > BRUTE_FORCE_LIMIT.
    """

    name = "brute-force"

    def __init__(self, params: DomainParams):
        F = params.field
        if F.q > BRUTE_FORCE_LIMIT:
            raise GuardError(f"brute force refused: q = {F.q} > {BRUTE_FORCE_LIMIT}")
        if params.tparams.mode != NORMALIZED:
            raise GuardError("brute force needs normalized-mode parameters")
        self.params = params
        tw, a = params.twist, params.a
        self.actor = {}
        for c in F.nonzero_elements():
            self.actor.setdefault(tw.phi(c, a), c)
        self.direction = params.tparams.direction_sum

    def scalar(self, pk: FieldElement) -> FieldElement | None:
        c = self.actor.get(pk)
        return None if c is None else c / self.direction[0]

    def recover_key(self, pk1: FieldElement, pk2: FieldElement) -> FieldElement | None:
        """The initiator's key, recomputed from a recovered secret scalar."""
        params = self.params
        c0 = self.scalar(pk1)
        if c0 is None or pk2 not in params.orbit_ctx:
            return None
        pos = params.orbit_ctx.position
        c = c0 * (self.direction[pos(pk2)] + self.direction[pos(pk1)])
        actor = c * power_sum(params, pk1, pk2)
        return params.twist.phi(actor, pk2) if actor else None

    # game interfaces
    def sap(self, params, pk, rng) -> PointFunction:
        c = self.actor.get(pk, params.field.zero)
        return PointFunction.const(params.field, c)

    def cgsap(self, params, pk1, pk2, rng) -> FieldElement | None:
        return self.recover_key(pk1, pk2)

    def dgsap(self, params, triple, rng) -> int:
        pk1, pk2, k = triple
        return 0 if self.recover_key(pk1, pk2) == k else 1


class CoinFlip:
    """Guesses without looking: a uniform actor, a uniform orbit point, a fair bit."""

    name = "coin-flip"

    def sap(self, params, pk, rng) -> PointFunction:
        return PointFunction.const(params.field, params.field.random_nonzero(rng))

    def cgsap(self, params, pk1, pk2, rng) -> FieldElement:
        return params.twist.phi(params.field.random_nonzero(rng), params.a)

    def dgsap(self, params, triple, rng) -> int:
        return int(rng.integers(2))


class Constant:
    name = "constant"

    def __init__(self, value):
        self.value = value

    def sap(self, params, pk, rng) -> PointFunction:
        return PointFunction.const(params.field, params.field(self.value))

    def cgsap(self, params, pk1, pk2, rng) -> FieldElement:
        return params.field(self.value)

    def dgsap(self, params, triple, rng) -> int:
        return int(self.value)


class EchoFirst:
    """CGSAP guess k = pk_1."""

    name = "echo-pk1"

    def cgsap(self, params, pk1, pk2, rng) -> FieldElement:
        return pk1


# ---------------------------------------------------------------------------
# Games


def sap_game(cfg: GameConfig, adversary) -> AdvantageReport:
    """Search game: given pk = psi(P, a), output any function P' with psi(P', a) = pk."""
    started = time.perf_counter()
    params = cfg.params
    wins = 0
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, TAG_SAP, trial)
        pk = public_value(params, _fresh_secret(params, rng, None))
        try:
            guess = adversary.sap(params, pk, rng)
            wins += psi(params.twist, guess, params.a) == pk
        except (SkewDHError, ValueError, ZeroDivisionError):
            pass
    return _search_report("sap", adversary.name, cfg, wins, 1 / params.r, 0, started)


def cgsap_game(cfg: GameConfig, adversary) -> AdvantageReport:
    """Computational game: given (pk_1, pk_2), output the session key."""
    started = time.perf_counter()
    params = cfg.params
    wins = redraws = 0
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, TAG_CGSAP, trial)
        pk1, pk2, key, n = honest_exchange(params, rng)
        redraws += n
        try:
            wins += adversary.cgsap(params, pk1, pk2, rng) == key
        except (SkewDHError, ValueError, ZeroDivisionError):
            pass
    return _search_report("cgsap", adversary.name, cfg, wins, 1 / params.r, redraws, started)


def dgsap_game(cfg: GameConfig, adversary, random_key: str = "orbit") -> AdvantageReport:
    """Decisional game: tell (pk_1, pk_2, k_0) from (pk_1, pk_2, k_1), k_1 = psi(S, a)."""
    started = time.perf_counter()
    params = cfg.params
    ones = [0, 0]
    redraws = 0
    for b in (0, 1):
        for trial in range(cfg.trials):
            rng = trial_rng(cfg.seed, TAG_DGSAP, b, trial)
            pk1, pk2, key, n = honest_exchange(params, rng)
            redraws += n
            if b:
                key = random_session_key(params, rng, random_key)
            try:
                ones[b] += adversary.dgsap(params, (pk1, pk2, key), rng) == 1
            except (SkewDHError, ValueError, ZeroDivisionError):
                pass
    n = cfg.trials
    d, lo, hi = newcombe(ones[0], n, ones[1], n, cfg.confidence)
    alo, ahi = abs_interval(lo, hi)
    return AdvantageReport(
        game="dgsap",
        adversary=adversary.name,
        trials=n,
        estimate=abs(d),
        ci_lo=alo,
        ci_hi=ahi,
        seed=cfg.seed,
        params_digest=_digest(params),
        confidence=cfg.confidence,
        w0=ones[0],
        w1=ones[1],
        signed=(d, lo, hi),
        redraws=redraws,
        extra={"random_key": random_key},
        wall_time=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Authenticated-links oracle harness


@dataclass(frozen=True)
class AmConfig:
    parties: tuple[str, ...] = ("U1", "U2", "U3")
    l: int = 1
    seed: int = 0
    random_key: str = "orbit"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("session bound l must be >= 1")
        if len(set(self.parties)) < 2:
            raise ValueError("need at least two distinct parties")


class SimulationAbort(Exception):
    """Raised inside the reduction when the embedded challenge cannot be answered."""


@dataclass
class _Challenge:
    pk1: FieldElement
    pk2: FieldElement
    key: FieldElement
    at: int


class AmHarness:
    """Send / Execute / Reveal / Corrupt / Test over honest parties.

    The adversary schedules delivery but cannot forge: ``send`` only accepts a
    message that some party emitted for that recipient and that has not been
    delivered yet.  There is no entry point for altering a message.
    """

    def __init__(self, params: DomainParams, amcfg: AmConfig, rng, b: int | None = None, challenge: _Challenge | None = None):
        self.params = params
        self.cfg = amcfg
        self.rng = rng
        self.b = int(rng.integers(2)) if b is None else b
        self.sessions: dict[tuple[str, bytes], SessionInstance] = {}
        self.log: list[tuple] = []
        self.revealed: set[tuple[str, bytes]] = set()
        self.corrupted: set[str] = set()
        self.tested: tuple[str, bytes] | None = None
        self.started = 0
        self.transcripts: list[tuple[bytes, bytes]] = []
        self._pending: list[tuple[str, bytes]] = []
        self._challenge = challenge
        self._embedded: set[tuple[str, bytes]] = set()

    # -- bookkeeping
    def _new_session_slot(self):
        if self.started >= self.cfg.l:
            raise OracleError(f"session bound l = {self.cfg.l} reached")
        self.started += 1
        return self.started - 1

    def _check_party(self, *names):
        for n in names:
            if n not in self.cfg.parties:
                raise OracleError(f"unknown party {n!r}")

    def _exposed(self, key: tuple[str, bytes]) -> bool:
        inst = self.sessions[key]
        partner = (inst.peer_id, inst.sid)
        return bool({key, partner} & self.revealed) or bool(inst.pid & self.corrupted)

    def _fresh_sid(self) -> bytes:
        while True:
            sid = self.rng.bytes(SID_LEN)
            if not any(k[1] == sid for k in self.sessions):
                return sid

    # -- oracles
    def send(self, party: str, message: InitMessage | RespMessage | None = None, *, peer: str | None = None, sid: bytes | None = None):
        """Start a session (no message) or deliver a pending message to ``party``."""
        self._check_party(party)
        params = self.params
        if message is None:
            self._check_party(peer)
            self._new_session_slot()
            sid = self._fresh_sid() if sid is None else sid
            if (party, sid) in self.sessions:
                raise OracleError("session id already used by this party")
            inst, m1 = initiate(params, party, peer, sid, self.rng)
            self.sessions[(party, sid)] = inst
            self._pending.append((peer, m1.encode()))
            self.log.append(("send", party, None, m1.encode()))
            return m1
        frame = message.encode()
        if (party, frame) not in self._pending:
            raise InjectionRefused("message was not emitted for this recipient, or was already delivered")
        self._pending.remove((party, frame))
        if isinstance(message, InitMessage):
            if (party, message.sid) in self.sessions:
                raise OracleError("session id already used by this party")
            try:
                inst, m2 = respond(params, party, message, self.rng)
            except ProtocolError as exc:
                self.sessions[(party, message.sid)] = exc.instance
                self.log.append(("send", party, frame, None))
                return None
            self.sessions[(party, message.sid)] = inst
            self._pending.append((message.sender, m2.encode()))
            self.log.append(("send", party, frame, m2.encode()))
            return m2
        inst = self.sessions.get((party, message.sid))
        if inst is None:
            raise OracleError("no session for this response")
        try:
            finalize(params, inst, message)
        except ProtocolError:
            pass
        self.log.append(("send", party, frame, None))
        return None

    def execute(self, initiator: str, responder: str, sid: bytes | None = None) -> tuple[bytes, bytes]:
        """A complete honest run; returns the transcript (init frame, resp frame)."""
        self._check_party(initiator, responder)
        if initiator == responder:
            raise OracleError("a party cannot run a session with itself")
        slot = self._new_session_slot()
        sid = self._fresh_sid() if sid is None else sid
        if (initiator, sid) in self.sessions or (responder, sid) in self.sessions:
            raise OracleError("session id already in use")
        params = self.params
        if self._challenge is not None and slot == self._challenge.at:
            ch = self._challenge
            m1, m2 = InitMessage(initiator, sid, ch.pk1), RespMessage(responder, sid, ch.pk2)
            for me, peer, role, own, other in ((initiator, responder, "initiator", ch.pk1, ch.pk2), (responder, initiator, "responder", ch.pk2, ch.pk1)):
                # key unknown to the simulator; sk stays NULL, acc is set so Test applies
                self.sessions[(me, sid)] = SessionInstance(role, me, peer, sid, used=True, acc=True, term=True, own_pk=own, peer_pk=other)
                self._embedded.add((me, sid))
        else:
            for _ in range(REDRAW_LIMIT):
                try:
                    ii, m1 = initiate(params, initiator, responder, sid, self.rng)
                    ij, m2 = respond(params, responder, m1, self.rng)
                    finalize(params, ii, m2)
                    break
                except DegenerateSession:
                    continue
            else:
                raise DegenerateSession(f"no complete run in {REDRAW_LIMIT} draws")
            self.sessions[(initiator, sid)] = ii
            self.sessions[(responder, sid)] = ij
        transcript = (m1.encode(), m2.encode())
        self.transcripts.append(transcript)
        self.log.append(("execute", initiator, responder, transcript))
        return transcript

    def reveal(self, party: str, sid: bytes) -> FieldElement:
        key = (party, sid)
        inst = self.sessions.get(key)
        if inst is None or not inst.acc:
            raise OracleError("no accepted session to reveal")
        if self.tested is not None and key in (self.tested, (self.sessions[self.tested].peer_id, sid)):
            raise TestOnExposedSession("the test session and its partner cannot be revealed")
        if key in self._embedded:
            raise SimulationAbort("reveal on the embedded session")
        self.revealed.add(key)
        self.log.append(("reveal", party, sid))
        return inst.sk

    def corrupt(self, party: str) -> dict[bytes, TElement]:
        """The party's stored secrets of sessions still running (there are no long-term keys)."""
        self._check_party(party)
        self.corrupted.add(party)
        out = {k[1]: inst.secret for k, inst in self.sessions.items() if k[0] == party and not inst.term and inst.secret is not None}
        self.log.append(("corrupt", party, sorted(out)))
        return out

    def test(self, party: str, sid: bytes) -> FieldElement:
        if self.tested is not None:
            raise DoubleTest("Test may be asked once")
        key = (party, sid)
        inst = self.sessions.get(key)
        if inst is None or not inst.acc:
            raise OracleError("Test needs an accepted session")
        if self._exposed(key):
            raise TestOnExposedSession("session or partner revealed, or a party corrupted")
        self.tested = key
        self.log.append(("test", party, sid))
        if self._challenge is not None:
            if key not in self._embedded:
                raise SimulationAbort("Test on a session without the challenge")
            return self._challenge.key
        if self.b == 0:
            return inst.sk
        return random_session_key(self.params, self.rng, self.cfg.random_key)


class AmCoinFlip:
    name = "coin-flip"

    def __call__(self, h: AmHarness, rng) -> int:
        sids = _run_sessions(h, rng)
        party, sid = sids[int(rng.integers(len(sids)))]
        h.test(party, sid)
        return int(rng.integers(2))


class AmAbstain:
    """Runs the sessions and never asks Test."""

    name = "abstain"

    def __call__(self, h: AmHarness, rng) -> None:
        _run_sessions(h, rng)
        return None


class AmBruteForce:
    """Executes l sessions, tests one at random, and checks the answer against
    the key recomputed from the transcript."""

    name = "brute-force"

    def __init__(self, params: DomainParams):
        self.solver = BruteForce(params)

    def __call__(self, h: AmHarness, rng) -> int:
        sids = _run_sessions(h, rng)
        k = int(rng.integers(len(sids)))
        party, sid = sids[k]
        got = h.test(party, sid)
        m1, m2 = h.transcripts[k]
        F = h.params.field
        pk1, pk2 = decode_message(F, m1).pk, decode_message(F, m2).pk
        return 0 if self.solver.recover_key(pk1, pk2) == got else 1


def _run_sessions(h: AmHarness, rng) -> list[tuple[str, bytes]]:
    """Execute l sessions between random distinct parties; returns initiator keys."""
    out = []
    parties = h.cfg.parties
    for _ in range(h.cfg.l):
        i, j = rng.choice(len(parties), size=2, replace=False)
        m1, _ = h.execute(parties[i], parties[j])
        out.append((parties[i], m1[6 : 6 + SID_LEN]))
    return out


def sk_experiment(params: DomainParams, amcfg: AmConfig, adversary, trials: int, seed: int | None = None, confidence: float = 0.99) -> AdvantageReport:
    """Session-key game: SKadv = |Pr[guess = b] - 1/2|; no Test means a forced random guess."""
    started = time.perf_counter()
    seed = amcfg.seed if seed is None else seed
    wins = abstained = 0
    for trial in range(trials):
        rng = trial_rng(seed, TAG_SK, trial)
        h = AmHarness(params, amcfg, rng)
        guess = adversary(h, rng)
        if guess is None or h.tested is None:
            abstained += 1
            guess = int(rng.integers(2))
        wins += guess == h.b
    lo, hi = wilson(wins, trials, confidence)
    excess = (wins / trials - 0.5, lo - 0.5, hi - 0.5)
    alo, ahi = abs_interval(excess[1], excess[2])
    return AdvantageReport(
        game="sk-am",
        adversary=getattr(adversary, "name", type(adversary).__name__),
        trials=trials,
        estimate=abs(excess[0]),
        ci_lo=alo,
        ci_hi=ahi,
        seed=seed,
        params_digest=_digest(params),
        confidence=confidence,
        wins=wins,
        rate=wins / trials,
        baseline=0.5,
        signed=excess,
        extra={"l": amcfg.l, "abstained": abstained},
        wall_time=time.perf_counter() - started,
    )


class ReductionDistinguisher:
    """DGSAP adversary built from an AM adversary.

    A session index r in [0, l) is drawn; the r-th Execute carries the
    challenge (pk_1, pk_2, k) and a Test on it is answered with k.  Every
    other session is simulated honestly.  If the adversary tests elsewhere,
    reveals the embedded session, or abstains, a fair bit is output.
    """

    def __init__(self, amcfg: AmConfig, am_adversary):
        self.amcfg = amcfg
        self.am_adversary = am_adversary
        self.name = f"reduction({getattr(am_adversary, 'name', 'adversary')}, l={amcfg.l})"

    def dgsap(self, params, triple, rng) -> int:
        pk1, pk2, k = triple
        at = int(rng.integers(self.amcfg.l))
        h = AmHarness(params, self.amcfg, rng, b=0, challenge=_Challenge(pk1, pk2, k, at))
        try:
            guess = self.am_adversary(h, rng)
        except SimulationAbort:
            return int(rng.integers(2))
        if guess is None or h.tested is None:
            return int(rng.integers(2))
        return int(guess)


def reduction_distinguisher(amcfg: AmConfig, am_adversary) -> ReductionDistinguisher:
    return ReductionDistinguisher(amcfg, am_adversary)


def reduction_game(cfg: GameConfig, amcfg: AmConfig, am_adversary) -> AdvantageReport:
    """Run the distinguisher on a uniformly chosen DGSAP challenge; report Pr[win] - 1/2."""
    started = time.perf_counter()
    params = cfg.params
    dist = ReductionDistinguisher(amcfg, am_adversary)
    wins = redraws = 0
    for trial in range(cfg.trials):
        rng = trial_rng(cfg.seed, TAG_REDUCTION, trial)
        b = int(rng.integers(2))
        pk1, pk2, key, n = honest_exchange(params, rng)
        redraws += n
        if b:
            key = random_session_key(params, rng, amcfg.random_key)
        wins += dist.dgsap(params, (pk1, pk2, key), rng) == b
    n = cfg.trials
    lo, hi = wilson(wins, n, cfg.confidence)
    return AdvantageReport(
        game="reduction",
        adversary=dist.name,
        trials=n,
        estimate=wins / n - 0.5,
        ci_lo=lo - 0.5,
        ci_hi=hi - 0.5,
        seed=cfg.seed,
        params_digest=_digest(params),
        confidence=cfg.confidence,
        wins=wins,
        rate=wins / n,
        baseline=0.5,
        redraws=redraws,
        extra={"l": amcfg.l},
        wall_time=time.perf_counter() - started,
    )


def reduction_consistency(cfg: GameConfig, amcfg: AmConfig, am_adversary) -> dict:
    """Compare the reduction's excess over 1/2 with eps/l from the session-key game.

    Agreement means the two confidence intervals overlap.
    """
    red = reduction_game(cfg, amcfg, am_adversary)
    sk = sk_experiment(cfg.params, amcfg, am_adversary, cfg.trials, cfg.seed, cfg.confidence)
    eps, eps_lo, eps_hi = sk.signed
    l = amcfg.l
    scaled = (eps / l, eps_lo / l, eps_hi / l)
    overlap = red.ci_lo <= scaled[2] and scaled[1] <= red.ci_hi
    return {
        "game": "reduction-consistency",
        "l": l,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "params_digest": red.params_digest,
        "reduction_excess": [red.estimate, red.ci_lo, red.ci_hi],
        "sk_eps": [eps, eps_lo, eps_hi],
        "sk_eps_over_l": list(scaled),
        "consistent": bool(overlap),
    }
