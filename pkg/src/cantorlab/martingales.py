"""Exact martingales: tables, procedural strategies, and their transforms.

A martingale is a nonnegative rational function d on bit strings with the
fairness equation d(sigma) = (d(sigma 0) + d(sigma 1)) / 2.  Tabulated
martingales carry values up to a fixed depth; betting strategies evaluate
lazily at any string, so the transformed objects (translations, truncated
tail averages, resets, mixtures) stay exact at every node.

All strategy objects are immutable after construction; value() memoizes
per instance, which is safe under concurrent use (dict updates are atomic
and recomputed values are identical).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import (
    DeadCapital,
    InvalidThreshold,
    NotWinningSet,
    ZeroPrefix,
)
from .reports import Report
from .space import PeriodicPoint, PrefixFreeSet, check_bits, cylinder_measure

ONE = Fraction(1)


def _all_strings(depth: int):
    yield ""
    frontier = [""]
    for _ in range(depth):
        frontier = [s + b for s in frontier for b in "01"]
        yield from frontier


class MartingaleTable:
    """Capital values on the full binary tree of strings up to a depth.

    Fairness is *not* enforced at construction: check_fairness is the
    decision procedure, and unfair tables are legitimate inputs to it.
    """

    __slots__ = ("depth", "values")

    def __init__(self, depth: int, values: Mapping[str, Fraction]):
        if depth < 0:
            raise ValueError("negative depth")
        vals = {}
        for s, v in values.items():
            check_bits(s)
            v = Fraction(v)
            if v < 0:
                raise ValueError(f"negative capital at {s!r}")
            vals[s] = v
        expected = 2 ** (depth + 1) - 1
        if len(vals) != expected or any(len(s) > depth for s in vals):
            raise ValueError(f"table must cover exactly the strings of length <= {depth}")
        self.depth = depth
        self.values = vals

    def __getitem__(self, s: str) -> Fraction:
        return self.values[s]

    def __repr__(self) -> str:
        return f"MartingaleTable(depth={self.depth})"


def check_fairness(d: MartingaleTable) -> bool:
    """True iff d(sigma) = (d(sigma0) + d(sigma1)) / 2 at every interior node."""
    return all(
        2 * d[s] == d[s + "0"] + d[s + "1"]
        for s in _all_strings(d.depth - 1)
    ) if d.depth > 0 else True


class BettingStrategy:
    """A martingale evaluable at any string, with exact rational values."""

    kind = "abstract"

    def __init__(self):
        self._cache: dict[str, Fraction] = {}

    def value(self, sigma: str) -> Fraction:
        v = self._cache.get(sigma)
        if v is None:
            v = self._compute(check_bits(sigma))
            self._cache[sigma] = v
        return v

    def _compute(self, sigma: str) -> Fraction:
        raise NotImplementedError

    def flat_beyond(self, sigma: str) -> bool:
        """True when the strategy is known constant on all extensions of sigma."""
        return False

    def params(self) -> dict:
        return {}


class ConstantStrategy(BettingStrategy):
    kind = "constant"

    def __init__(self, c: Fraction | int = 1):
        super().__init__()
        self.c = Fraction(c)
        if self.c < 0:
            raise ValueError("negative constant")

    def _compute(self, sigma: str) -> Fraction:
        return self.c

    def flat_beyond(self, sigma: str) -> bool:
        return True

    def params(self) -> dict:
        return {"c": self.c}


class TableStrategy(BettingStrategy):
    """Tabulated martingale, extended by constancy past its depth."""

    kind = "tabulated"

    def __init__(self, table: MartingaleTable):
        super().__init__()
        self.table = table

    def _compute(self, sigma: str) -> Fraction:
        return self.table[sigma[: self.table.depth]]

    def flat_beyond(self, sigma: str) -> bool:
        return len(sigma) >= self.table.depth

    def params(self) -> dict:
        return {"depth": self.table.depth}


class PointDoubler(BettingStrategy):
    """Bets everything on following a fixed point: 2^n along it, dead off it.

    PointDoubler(PeriodicPoint("", "0")) is the all-on-zeros doubler used
    throughout the fixtures.
    """

    kind = "point-doubler"

    def __init__(self, point: PeriodicPoint):
        super().__init__()
        self.point = point

    def _compute(self, sigma: str) -> Fraction:
        if self.point.prefix(len(sigma)) == sigma:
            return Fraction(2 ** len(sigma))
        return Fraction(0)

    def flat_beyond(self, sigma: str) -> bool:
        return self.value(sigma) == 0

    def params(self) -> dict:
        return {"head": self.point.head, "period": self.point.period}


class TranslateStrategy(BettingStrategy):
    """tau -> base(sigma tau): capital seen after entering [sigma]."""

    kind = "translated"

    def __init__(self, base: BettingStrategy, sigma: str):
        super().__init__()
        self.base = base
        self.sigma = check_bits(sigma)

    def _compute(self, tau: str) -> Fraction:
        return self.base.value(self.sigma + tau)

    def flat_beyond(self, sigma: str) -> bool:
        return self.base.flat_beyond(self.sigma + sigma)

    def params(self) -> dict:
        return {"sigma": self.sigma}


class ScaledStrategy(BettingStrategy):
    """Positive rescaling; fairness is preserved by linearity."""

    kind = "scaled"

    def __init__(self, base: BettingStrategy, factor: Fraction):
        super().__init__()
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        self.base = base
        self.factor = Fraction(factor)

    def _compute(self, sigma: str) -> Fraction:
        return self.factor * self.base.value(sigma)

    def flat_beyond(self, sigma: str) -> bool:
        return self.base.flat_beyond(sigma)

    def params(self) -> dict:
        return {"factor": self.factor}


class BlendStrategy(BettingStrategy):
    """Nonnegative-weight combination of strategies (constant 1 included via
    ConstantStrategy); the workhorse behind shifts and averages."""

    kind = "blend"

    def __init__(self, terms: list[tuple[Fraction, BettingStrategy]]):
        super().__init__()
        self.terms = tuple((Fraction(w), s) for w, s in terms)
        if any(w < 0 for w, _ in self.terms):
            raise ValueError("blend weights must be nonnegative")

    def _compute(self, sigma: str) -> Fraction:
        return sum((w * s.value(sigma) for w, s in self.terms), start=Fraction(0))

    def flat_beyond(self, sigma: str) -> bool:
        return all(s.flat_beyond(sigma) for w, s in self.terms if w != 0)

    def params(self) -> dict:
        return {"weights": [w for w, _ in self.terms]}


def positive_shift(d: BettingStrategy) -> BettingStrategy:
    """d' = (d + 1)/2: positive everywhere, normed when d is."""
    return BlendStrategy([(Fraction(1, 2), d), (Fraction(1, 2), ConstantStrategy(1))])


class MixtureStrategy(BettingStrategy):
    """D = (1 - 2^(-n_e+1)) d + 2^(-n_e+1) d_e, the closure-step mixture."""

    kind = "mixture"

    def __init__(self, d: BettingStrategy, d_e: BettingStrategy, n_e: int):
        super().__init__()
        if n_e < 1:
            raise ValueError("n_e must be >= 1")
        self.d = d
        self.d_e = d_e
        self.n_e = n_e
        self.weight = Fraction(1, 2 ** (n_e - 1))

    def _compute(self, sigma: str) -> Fraction:
        return (1 - self.weight) * self.d.value(sigma) + self.weight * self.d_e.value(sigma)

    def flat_beyond(self, sigma: str) -> bool:
        return self.d.flat_beyond(sigma) and self.d_e.flat_beyond(sigma)

    def params(self) -> dict:
        return {"n_e": self.n_e}


class AverageStrategy(BettingStrategy):
    """Truncated average of normalized translates plus the residual weight.

    D(tau) = sum over |sigma| <= L of 2^(-2|sigma|-1) base(sigma tau)/base(sigma)
             + 2^(-L-1).
    Routing the residual tail weight into the constant 1 keeps the result an
    exact normed martingale instead of an approximation of the full series.
    """

    kind = "averaged"

    def __init__(self, base: BettingStrategy, level: int):
        super().__init__()
        if level < 0:
            raise ValueError("negative truncation level")
        self.base = base
        self.level = level
        self.residual = Fraction(1, 2 ** (level + 1))
        self._anchors = list(_all_strings(level))
        self._roots = {s: base.value(s) for s in self._anchors}
        if any(v == 0 for v in self._roots.values()):
            raise ZeroPrefix("base has zero capital at some string of length <= L")

    def _compute(self, tau: str) -> Fraction:
        total = self.residual
        for s in self._anchors:
            w = Fraction(1, 2 ** (2 * len(s) + 1))
            total += w * self.base.value(s + tau) / self._roots[s]
        return total

    def flat_beyond(self, sigma: str) -> bool:
        return all(self.base.flat_beyond(s + sigma) for s in self._anchors)

    def params(self) -> dict:
        return {"level": self.level}


def translate(d: BettingStrategy, sigma: str) -> BettingStrategy:
    """Shifted strategy tau -> d(sigma tau); fairness is inherited."""
    if sigma == "":
        return d
    return TranslateStrategy(d, sigma)


def average_truncated(d: BettingStrategy, level: int, shift: bool = True) -> BettingStrategy:
    """Truncated tail-average of d, normed and fair by construction.

    When d has a zero-capital prefix within the truncation level, the
    positivity shift (d+1)/2 is applied first; pass shift=False to get a
    ZeroPrefix error instead.
    """
    try:
        return AverageStrategy(d, level)
    except ZeroPrefix:
        if not shift:
            raise
        return AverageStrategy(positive_shift(d), level)


class ResetStrategy(BettingStrategy):
    """Simulates the base martingale and restarts after each completed block.

    For sigma = rho tau with rho a concatenation of blocks and tau without a
    block prefix (unique since the block set is prefix-free):
    D(sigma iota) = D(sigma) * d(tau iota) / d(tau).  A word made of k blocks
    multiplies the capital by at least q per block, so D >= q^k there.
    """

    kind = "reset"

    def __init__(self, base: BettingStrategy, q: Fraction, blocks: PrefixFreeSet):
        super().__init__()
        self.base = base
        self.q = Fraction(q)
        self.blocks = blocks
        self._block_set = set(blocks.elements)

    def _compute(self, sigma: str) -> Fraction:
        cap = ONE
        tau = ""
        for bit in sigma:
            den = self.base.value(tau)
            if den == 0:
                raise DeadCapital(f"base martingale dies at {tau!r} inside a block")
            tau += bit
            cap = cap * self.base.value(tau) / den
            if tau in self._block_set:
                tau = ""
        return cap

    def params(self) -> dict:
        return {"q": self.q, "blocks": list(self.blocks.elements)}


def reset(d: BettingStrategy, q: Fraction, blocks: PrefixFreeSet) -> BettingStrategy:
    """Reset martingale over the (d, q)-winning set `blocks`.

    Validates that the blocks really are winning: capital >= q at each block
    and at no proper prefix of one.  d must be normed so each completed block
    multiplies capital by at least q exactly.
    """
    q = Fraction(q)
    if q <= 1:
        raise InvalidThreshold("need q > 1")
    if d.value("") != 1:
        raise NotWinningSet("reset base must be normed")
    for s in blocks:
        if d.value(s) < q:
            raise NotWinningSet(f"block {s!r} has capital {d.value(s)} < {q}")
        for i in range(len(s)):
            if d.value(s[:i]) >= q:
                raise NotWinningSet(f"proper prefix {s[:i]!r} of block {s!r} already wins")
    return ResetStrategy(d, q, blocks)


def mixture(d: BettingStrategy, d_e: BettingStrategy, n_e: int) -> BettingStrategy:
    """Exact convex combination (1-2^(-n_e+1)) d + 2^(-n_e+1) d_e."""
    if d.value("") != 1 or d_e.value("") != 1:
        raise ValueError("mixture requires normed strategies")
    return MixtureStrategy(d, d_e, n_e)


class WinningSet:
    """Minimal strings at which a strategy's capital first reaches q.

    source_depth is the search horizon; truncated reports whether live
    capital below the horizon means deeper wins may exist.
    """

    __slots__ = ("threshold", "generators", "source_depth", "truncated")

    def __init__(self, threshold: Fraction, generators: PrefixFreeSet,
                 source_depth: int, truncated: bool):
        self.threshold = Fraction(threshold)
        self.generators = generators
        self.source_depth = source_depth
        self.truncated = truncated

    def __repr__(self) -> str:
        return (f"WinningSet(q={self.threshold}, generators={list(self.generators)!r}, "
                f"depth={self.source_depth}, truncated={self.truncated})")


def winning_set(d: BettingStrategy, q: Fraction, depth: int) -> WinningSet:
    """Minimal strings of length <= depth with d >= q, by tree search."""
    q = Fraction(q)
    if q <= 1:
        raise InvalidThreshold("need q > 1")
    gens: list[str] = []
    truncated = False

    stack = [""]
    while stack:
        s = stack.pop()
        if d.value(s) >= q:
            gens.append(s)
            continue
        if len(s) == depth:
            if d.value(s) > 0 and not d.flat_beyond(s):
                truncated = True
            continue
        stack.append(s + "1")
        stack.append(s + "0")
    return WinningSet(q, PrefixFreeSet(gens), depth, truncated)


def verify_ville_kolmogorov(d: MartingaleTable, sigma: str, q: Fraction) -> Report:
    """Brute-force check of mu(U_{d,sigma,q} | sigma) <= 1/q within the table.

    U_{d,sigma,q} holds the sequences whose capital reaches q * d(sigma) at
    some proper extension of sigma; the conditional measure is summed over
    its minimal witnesses.  Both sides are reported exactly.  With
    d(sigma) = 0 the threshold degenerates to 0 and the literal witness set
    is all of [sigma]; the report flags this case instead of hiding it.
    """
    q = Fraction(q)
    if q <= 1:
        raise InvalidThreshold("need q > 1")
    check_bits(sigma)
    if len(sigma) > d.depth:
        raise ValueError("sigma longer than table depth")
    start = d[sigma]
    threshold = q * start
    hits: list[str] = []
    stack = [sigma + b for b in "01"] if len(sigma) < d.depth else []
    while stack:
        s = stack.pop()
        if d[s] >= threshold:
            hits.append(s)
            continue
        if len(s) < d.depth:
            stack.append(s + "1")
            stack.append(s + "0")
    measured = sum(
        (cylinder_measure(s[len(sigma):]) for s in hits), start=Fraction(0)
    )
    rep = Report("ville-kolmogorov")
    rep.put("sigma", sigma)
    rep.put("q", q)
    rep.put("capital_at_sigma", start)
    rep.put("threshold", threshold)
    rep.put("witnesses", sorted(hits, key=lambda s: (len(s), s)))
    rep.put("degenerate_zero_capital", start == 0)
    rep.check("conditional measure <= 1/q", measured, "<=", Fraction(1) / q)
    return rep


def success_capital(d: BettingStrategy, x: PeriodicPoint, depth: int) -> list[Fraction]:
    """Exact capital trace d(X restricted to 0..depth)."""
    return [d.value(x.prefix(n)) for n in range(depth + 1)]


def table_of(d: BettingStrategy, depth: int) -> MartingaleTable:
    """Tabulate a strategy; lets table-level checks run on any strategy."""
    return MartingaleTable(depth, {s: d.value(s) for s in _all_strings(depth)})
