"""Closure constructions feeding the finite-extension diagonalization.

Three families of open sets are closed under conditioning (P1), cylinder
completion (P2) and test absorption (P3):

  MLR: bounded prefix-free generator sets;
  CR:  winning sets of normed exact martingales, carried as (strategy, q);
  SR:  staged sets with exact stage measures.

Each pX_* operation returns its construction together with an exact
certificate report.  The provider classes bundle the three operations per
family behind one interface for the diagonalizer; search depths are
explicit everywhere the underlying statements quantify over all strings.
"""

from __future__ import annotations

from fractions import Fraction

from .covers import TestFamily
from .errors import (
    AlreadyWon,
    BadThreshold,
    DeadCapital,
    FullConditional,
    SearchExhausted,
    SlackViolated,
)
from .martingales import (
    BettingStrategy,
    ConstantStrategy,
    MixtureStrategy,
    ScaledStrategy,
    TranslateStrategy,
    WinningSet,
    mixture,
    winning_set,
)
from .reports import Report
from . import space
from .space import EMPTY_SET, PrefixFreeSet, StagedOpenSet, condition, covers, measure, union


def _least_slack(m: Fraction) -> int:
    """Least k >= 1 with m < 1 - 2^-k; requires m < 1."""
    if m >= 1:
        raise FullConditional("no slack below 1")
    k = 1
    while m >= 1 - Fraction(1, 2 ** k):
        k += 1
    return k


def _strings_to_depth(depth: int):
    frontier = [""]
    yield ""
    for _ in range(depth):
        frontier = [s + b for s in frontier for b in "01"]
        yield from frontier


# ---------------------------------------------------------------------------
# MLR case: bounded c.e. open sets as plain generator sets.

def p1_mlr(u: PrefixFreeSet, sigma: str) -> PrefixFreeSet:
    """Conditioning keeps the class: (U | sigma), required bounded."""
    c = condition(u, sigma)
    if measure(c) == 1:
        raise FullConditional(f"mu(U | {sigma!r}) = 1")
    return c


def p2_mlr(u: PrefixFreeSet, q: Fraction) -> tuple[PrefixFreeSet, Report]:
    """Cylinder completion: V = union of [sigma] with mu(U | sigma) > q.

    Minimal such sigma are searched to depth maxlen(U); beyond that depth the
    conditional measure is 0 or 1 and the 1-cases are extensions of cylinders
    already taken.  Certifies mu(V) <= mu(U)/q < 1, that V covers U, and that
    V covers every full cylinder within the search depth.
    """
    q = Fraction(q)
    mu = measure(u)
    if not (mu < q < 1):
        raise BadThreshold(f"need measure(U) = {mu} < q < 1, got q = {q}")
    depth = u.maxlen
    chosen: list[str] = []
    stack = [""]
    while stack:
        s = stack.pop()
        if measure(condition(u, s)) > q:
            chosen.append(s)
            continue
        if len(s) < depth:
            stack.append(s + "1")
            stack.append(s + "0")
    v = union(PrefixFreeSet(chosen), u)
    rep = Report("p2-mlr")
    rep.put("q", q)
    rep.put("search_depth", depth)
    rep.check("measure(V) <= measure(U)/q", measure(v), "<=", mu / q)
    rep.check("measure(V) < 1", measure(v), "<", Fraction(1))
    rep.record("V covers U", covers(v, u))
    full_ok = all(
        measure(condition(v, s)) == 1
        for s in _strings_to_depth(depth)
        if measure(condition(u, s)) == 1
    )
    rep.record("full cylinders within depth covered", full_ok)
    return v, rep


def p3_mlr(u: PrefixFreeSet, sigma: str, k: int,
           test: TestFamily | None) -> tuple[int, PrefixFreeSet, Report]:
    """Absorb test level n_e = |sigma| + k while keeping mu(V | sigma) < 1."""
    m = measure(condition(u, sigma))
    if m >= 1 - Fraction(1, 2 ** k):
        raise SlackViolated(f"mu(U|sigma) = {m} >= 1 - 2^-{k}")
    n_e = len(sigma) + k
    level = EMPTY_SET if test is None else test.level(n_e)
    v = union(u, level)
    rep = Report("p3-mlr")
    rep.put("n_e", n_e)
    rep.put("k", k)
    rep.check("mu(level | sigma) <= 2^-k",
              measure(condition(level, sigma)), "<=", Fraction(1, 2 ** k))
    rep.check("mu(V | sigma) < 1", measure(condition(v, sigma)), "<", Fraction(1))
    rep.record("V covers U", covers(v, u))
    rep.record("V covers test level", covers(v, level))
    return n_e, v, rep


# ---------------------------------------------------------------------------
# CR case: winning sets carried as (normed strategy, threshold).

def p1_cr(d: BettingStrategy, q: Fraction, sigma: str,
          empty_marker: bool = False) -> tuple[BettingStrategy, Fraction]:
    """Conditioned winning set: d'(tau) = d(sigma tau)/d(sigma), q' = q/d(sigma).

    Dead capital at sigma means (U | sigma) is empty; with empty_marker set
    the canonical empty representative (constant 1, threshold 2) is returned
    instead of raising.
    """
    q = Fraction(q)
    cap = d.value(sigma)
    if cap == 0:
        if empty_marker:
            return ConstantStrategy(1), Fraction(2)
        raise DeadCapital(f"d({sigma!r}) = 0")
    for i in range(len(sigma) + 1):
        if d.value(sigma[:i]) >= q:
            raise AlreadyWon(f"capital reaches {q} at prefix {sigma[:i]!r}")
    if sigma == "":
        return d, q
    return ScaledStrategy(TranslateStrategy(d, sigma), Fraction(1) / cap), q / cap


def p2_cr_check(d: BettingStrategy, q: Fraction, sigma: str, depth: int) -> Report:
    """Exhaustive check of: full conditional winning measure forces d(sigma) >= q.

    The winning region is enumerated to depth; when its conditional measure
    at sigma is exactly 1 the Ville-Kolmogorov inequality leaves no room
    below q at sigma, and the report asserts just that.
    """
    w = winning_set(d, q, depth)
    mu = measure(condition(w.generators, sigma))
    rep = Report("p2-cr")
    rep.put("winning_set", w.generators)
    rep.put("mu_winning_given_sigma", mu)
    rep.put("capital_at_sigma", d.value(sigma))
    if mu == 1:
        rep.check("d(sigma) >= q", d.value(sigma), ">=", Fraction(q))
    else:
        rep.record("implication vacuous (conditional measure < 1)", True)
    return rep


def p3_cr(d: BettingStrategy, q: Fraction, sigma: str, d_e: BettingStrategy,
          depth: int, cap: int = 16) -> tuple[int, WinningSet, Report]:
    """Mixture step: find n_e with D = (1-2^(-n_e+1)) d + 2^(-n_e+1) d_e staying
    below min((1-2^(-n_e+1)) q, 2) along every prefix of sigma.

    The resulting winning set of D covers both the (d, q)-winning set and the
    level-n_e set induced by d_e, while mu(V | sigma) < 1.  The n_e search is
    linear with a cap; on exhaustion the blocking inequality is reported.
    """
    q = Fraction(q)
    if cap < 1:
        raise ValueError("need cap >= 1")
    if d.value(sigma) >= q:
        raise AlreadyWon(f"d({sigma!r}) = {d.value(sigma)} >= {q}")
    last = None
    for n_e in range(1, cap + 1):
        weight = Fraction(1, 2 ** (n_e - 1))
        threshold = min((1 - weight) * q, Fraction(2))
        big = mixture(d, d_e, n_e)
        worst = max(big.value(sigma[:i]) for i in range(len(sigma) + 1))
        last = (n_e, worst, threshold)
        if threshold <= 1 or worst >= threshold:
            continue
        v = winning_set(big, threshold, depth)
        rep = Report("p3-cr")
        rep.put("n_e", n_e)
        rep.put("threshold", threshold)
        rep.put("D_at_sigma", big.value(sigma))
        rep.check("D along sigma < threshold", worst, "<", threshold)
        rep.check("mu(V | sigma) < 1",
                  measure(condition(v.generators, sigma)), "<", Fraction(1))
        u_gens = winning_set(d, q, depth).generators
        t_gens = winning_set(d_e, Fraction(2 ** n_e), depth).generators
        rep.record("V covers (d,q)-winning set", covers(v.generators, u_gens))
        rep.record("V covers induced test level", covers(v.generators, t_gens))
        return n_e, v, rep
    raise SearchExhausted(
        f"no n_e <= {cap} works; at n_e={last[0]} capital along sigma reaches "
        f"{last[1]} against threshold {last[2]}",
        frontier=last,
    )


# ---------------------------------------------------------------------------
# SR case: staged sets with exact stage measures.

def p1_sr(u: StagedOpenSet, sigma: str) -> StagedOpenSet:
    """Stagewise conditioning; stage measures stay exact."""
    return StagedOpenSet(tuple(condition(s, sigma) for s in u.stages))


def p3_sr(u: StagedOpenSet, v: StagedOpenSet) -> StagedOpenSet:
    """Stagewise union of two staged sets."""
    n = max(len(u.stages), len(v.stages))
    return StagedOpenSet(tuple(union(u.stage(i), v.stage(i)) for i in range(n)))


def p2_sr(u: StagedOpenSet, k: int, depth: int) -> tuple[PrefixFreeSet, Report]:
    """Computable cylinder completion for a staged set.

    For each sigma up to the search depth, take the least stage s with
    mu(final minus stage_s) < 2^(-2|sigma|-k-1) and admit sigma when
    mu(stage_s | sigma) > 1 - 2^(-|sigma|-k-1).  Certifies: full cylinders
    within depth are covered, the overshoot mu([V] minus [final]) stays
    under 2^-k, and [V] union [final] stays bounded.
    """
    final = u.final
    mu_final = u.final_measure
    if mu_final >= 1 - Fraction(1, 2 ** k):
        raise SlackViolated(f"measure(U) = {mu_final} >= 1 - 2^-{k}")
    admitted: list[str] = []
    for s in _strings_to_depth(depth):
        gap = Fraction(1, 2 ** (2 * len(s) + k + 1))
        stage_idx = next(
            i for i, st in enumerate(u.stages) if mu_final - measure(st) < gap
        )
        stage = u.stages[stage_idx]
        if measure(condition(stage, s)) > 1 - Fraction(1, 2 ** (len(s) + k + 1)):
            admitted.append(s)
    v = space.reduce(admitted)
    rep = Report("p2-sr")
    rep.put("k", k)
    rep.put("depth", depth)
    full_ok = all(
        measure(condition(v, s)) == 1
        for s in _strings_to_depth(depth)
        if measure(condition(final, s)) == 1
    )
    rep.record("full cylinders within depth covered", full_ok)
    overshoot = measure(union(v, final)) - mu_final
    rep.check("mu([V] \\ [U]) < 2^-k", overshoot, "<", Fraction(1, 2 ** k))
    rep.check("mu([V] + [U]) < 1", measure(union(v, final)), "<", Fraction(1))
    return v, rep


# ---------------------------------------------------------------------------
# Providers: the uniform face the diagonalizer sees.

class ProviderState:
    """Case-specific carrier; generators is the finite face of the open set."""

    __slots__ = ("generators", "payload")

    def __init__(self, generators: PrefixFreeSet, payload=None):
        self.generators = generators
        self.payload = payload


class ClosureProvider:
    """One of the three closed families, with its search parameters fixed."""

    case = "abstract"

    def initial(self) -> ProviderState:
        raise NotImplementedError

    def p3(self, state: ProviderState, sigma: str, test: TestFamily | None,
           stage: int) -> tuple[int | None, ProviderState, Report]:
        raise NotImplementedError

    def p1(self, state: ProviderState, sigma: str) -> ProviderState:
        raise NotImplementedError

    def p2(self, state: ProviderState) -> tuple[ProviderState, Report]:
        raise NotImplementedError


class MLRProvider(ClosureProvider):
    case = "mlr"

    def __init__(self, q: Fraction | None = None, k: int | None = None):
        self.q = None if q is None else Fraction(q)
        self.k = k

    def initial(self) -> ProviderState:
        return ProviderState(EMPTY_SET)

    def p3(self, state, sigma, test, stage):
        u = state.generators
        k = self.k if self.k is not None else _least_slack(measure(condition(u, sigma)))
        n_e, v, rep = p3_mlr(u, sigma, k, test)
        return n_e, ProviderState(v), rep

    def p1(self, state, sigma):
        return ProviderState(p1_mlr(state.generators, sigma))

    def p2(self, state):
        u = state.generators
        q = self.q if self.q is not None else (measure(u) + 1) / 2
        v, rep = p2_mlr(u, q)
        return ProviderState(v), rep


class CRProvider(ClosureProvider):
    """Winning sets; the payload threads the (strategy, threshold) pair."""

    case = "cr"

    def __init__(self, depth: int = 8, cap: int = 16):
        self.depth = depth
        self.cap = cap

    def initial(self) -> ProviderState:
        # The empty set is admitted into the class as the winning set of the
        # constant-1 strategy at threshold 2.
        return ProviderState(EMPTY_SET, payload=(ConstantStrategy(1), Fraction(2)))

    def p3(self, state, sigma, test, stage):
        d, q = state.payload
        d_e = test.martingale if test is not None and test.martingale is not None \
            else ConstantStrategy(1)
        n_e, v, rep = p3_cr(d, q, sigma, d_e, self.depth, cap=self.cap)
        big = mixture(d, d_e, n_e)
        return n_e, ProviderState(v.generators, payload=(big, v.threshold)), rep

    def p1(self, state, sigma):
        d, q = state.payload
        d2, q2 = p1_cr(d, q, sigma, empty_marker=True)
        gens = winning_set(d2, q2, max(self.depth - len(sigma), 0)).generators
        return ProviderState(gens, payload=(d2, q2))

    def p2(self, state):
        d, q = state.payload
        rep = Report("p2-cr-closure")
        # For winning sets, P2 needs no new set: a full conditional forces the
        # capital over the threshold, so the full cylinders already sit inside.
        for s in _strings_to_depth(min(self.depth, state.generators.maxlen)):
            if measure(condition(state.generators, s)) == 1:
                rep.check(f"d({s!r}) >= q", d.value(s), ">=", q)
        rep.record("P2 realized by the set itself", True)
        return state, rep


class SRProvider(ClosureProvider):
    case = "sr"

    def __init__(self, k: int | None = None, depth: int | None = None):
        self.k = k
        self.depth = depth

    def initial(self) -> ProviderState:
        st = StagedOpenSet((EMPTY_SET,))
        return ProviderState(EMPTY_SET, payload=st)

    def p3(self, state, sigma, test, stage):
        staged = state.payload
        m = measure(condition(staged.final, sigma))
        k = self.k if self.k is not None else _least_slack(m)
        n_e = len(sigma) + k
        level = EMPTY_SET if test is None else test.level(n_e)
        merged = p3_sr(staged, StagedOpenSet((level,)))
        rep = Report("p3-sr")
        rep.put("n_e", n_e)
        rep.put("k", k)
        rep.check("mu(V | sigma) < 1",
                  measure(condition(merged.final, sigma)), "<", Fraction(1))
        rep.record("V covers U", covers(merged.final, staged.final))
        rep.record("V covers test level", covers(merged.final, level))
        return n_e, ProviderState(merged.final, payload=merged), rep

    def p1(self, state, sigma):
        conditioned = p1_sr(state.payload, sigma)
        return ProviderState(conditioned.final, payload=conditioned)

    def p2(self, state):
        staged = state.payload
        k = self.k if self.k is not None else _least_slack(staged.final_measure)
        depth = self.depth if self.depth is not None else staged.final.maxlen
        depth = max(depth, staged.final.maxlen)
        v, rep = p2_sr(staged, k, depth)
        return ProviderState(v, payload=StagedOpenSet((v,))), rep


def provider_for(case: str, **kwargs) -> ClosureProvider:
    table = {"mlr": MLRProvider, "cr": CRProvider, "sr": SRProvider}
    if case not in table:
        raise ValueError(f"unknown closure case {case!r}")
    return table[case](**kwargs)
