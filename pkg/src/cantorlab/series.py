"""Series <-> open set constructions through coordinate and interval blocks.

Cantor space doubles as a product of unit intervals: coordinate n reads its
binary digits at the bit positions the diagonal pairing assigns to n.  The
constraint sets built here (coordinate intervals [0, alpha), all-zero
interval blocks) are cylinder sets pinned at finitely many positions, and
unions of them are materialized as prefix-free generator sets by a pruned
tree walk, so measures stay exact however the constraints interleave.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .coding import DyadicFunction
from .covers import TestFamily
from .errors import (
    InvalidThreshold,
    MissingStage,
    NonDyadicAlpha,
    SearchExhausted,
    Unbounded,
    ValueOverOne,
    WeightTooLarge,
)
from .martingales import BettingStrategy
from .pairing import antidiagonal_pairs, cantor_pair
from .reports import Report
from . import space
from .space import (
    EMPTY_SET,
    FULL_SET,
    PeriodicPoint,
    PrefixFreeSet,
    StagedOpenSet,
    lenlex_key,
    measure,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class CoordinatePairing:
    """Bit positions of the coordinates: coordinate n reads digit j at
    position pair(n, j), along the standard antidiagonal bijection."""

    def position(self, n: int, j: int) -> int:
        return cantor_pair(n, j)

    def positions(self, n: int, count: int) -> list[int]:
        return [self.position(n, j) for j in range(count)]

    rule = "antidiagonal pairing (n, j) -> (n+j)(n+j+1)/2 + j"


PAIRING = CoordinatePairing()


class IntervalPartition:
    """Partition of the bit positions into blocks I_(i,l) of length l.

    Pairs (i, l), l >= 1, are laid out antidiagonal by antidiagonal into
    consecutive blocks; the placement order is immaterial for the measure
    facts, it is fixed here for reproducibility.
    """

    rule = "antidiagonal pairs (i, l), l >= 1, in consecutive blocks"

    def __init__(self):
        self._blocks: dict[tuple[int, int], range] = {}
        self._gen = antidiagonal_pairs(0, 1)
        self._next_start = 0

    def block(self, i: int, l: int) -> range:
        if l < 1 or i < 0:
            raise ValueError("need i >= 0 and l >= 1")
        while (i, l) not in self._blocks:
            a, b = next(self._gen)
            self._blocks[(a, b)] = range(self._next_start, self._next_start + b)
            self._next_start += b
        return self._blocks[(i, l)]

    def owner(self, position: int) -> tuple[int, int]:
        while self._next_start <= position:
            a, b = next(self._gen)
            self._blocks[(a, b)] = range(self._next_start, self._next_start + b)
            self._next_start += b
        for (i, l), r in self._blocks.items():
            if position in r:
                return (i, l)
        raise AssertionError("blocks tile the positions")


PARTITION = IntervalPartition()


class CylinderConstraintSet:
    """The set of sequences with fixed bits at finitely many positions."""

    __slots__ = ("constraints",)

    def __init__(self, constraints: Iterable[tuple[int, str]]):
        cons = []
        seen = {}
        for pos, bit in constraints:
            pos = int(pos)
            if pos < 0 or bit not in ("0", "1"):
                raise ValueError(f"bad constraint ({pos}, {bit!r})")
            if seen.get(pos, bit) != bit:
                raise ValueError(f"conflicting constraints at position {pos}")
            seen[pos] = bit
            cons.append((pos, bit))
        self.constraints = tuple(sorted(set(cons)))

    @property
    def depth(self) -> int:
        return self.constraints[-1][0] + 1 if self.constraints else 0

    def measure(self) -> Fraction:
        return Fraction(1, 2 ** len(self.constraints))

    def consistent(self, sigma: str) -> bool:
        return all(sigma[p] == b for p, b in self.constraints if p < len(sigma))

    def conditional_measure(self, sigma: str) -> Fraction:
        """mu(Z | sigma): free positions beyond sigma halve independently."""
        if not self.consistent(sigma):
            return ZERO
        beyond = sum(1 for p, _ in self.constraints if p >= len(sigma))
        return Fraction(1, 2 ** beyond)

    def covered_by(self, w: PrefixFreeSet) -> bool:
        """Z subseteq [W], decided by mu([W] cap Z) = mu(Z) in integer units."""
        top = max(w.maxlen, self.depth)
        total = 0
        for s in w.elements:
            if self.consistent(s):
                beyond = sum(1 for p, _ in self.constraints if p >= len(s))
                total += 2 ** (top - len(s) - beyond)
        return total == 2 ** (top - len(self.constraints))

    def member(self, x: PeriodicPoint) -> bool:
        prefix = x.prefix(self.depth)
        return all(prefix[p] == b for p, b in self.constraints)

    def generators(self) -> PrefixFreeSet:
        return union_generators([self])

    def __repr__(self) -> str:
        return f"CylinderConstraintSet({list(self.constraints)!r})"


def union_generators(terms: Sequence[CylinderConstraintSet]) -> PrefixFreeSet:
    """Minimal prefix-free generators of a union of constraint sets.

    Walks the binary tree once, pruning a subtree as soon as every term is
    violated and emitting a generator as soon as some term is fully pinned;
    the visit count stays proportional to the output.
    """
    terms = list(terms)
    if any(not t.constraints for t in terms):
        return FULL_SET
    if not terms:
        return EMPTY_SET
    depth = max(t.depth for t in terms)
    by_pos: list[list[tuple[int, str]]] = [[] for _ in range(depth)]
    for ti, t in enumerate(terms):
        for p, b in t.constraints:
            by_pos[p].append((ti, b))
    all_mask = (1 << len(terms)) - 1
    out: list[str] = []

    def walk(sigma: str, remaining: list[int], alive: int) -> None:
        pos = len(sigma)
        for bit in "01":
            rem = remaining
            mask = alive
            done = False
            if by_pos[pos]:
                rem = remaining[:]
                for ti, need in by_pos[pos]:
                    if not mask & (1 << ti):
                        continue
                    if bit == need:
                        rem[ti] -= 1
                        if rem[ti] == 0:
                            done = True
                    else:
                        mask &= ~(1 << ti)
            if done:
                out.append(sigma + bit)
            elif mask:
                walk(sigma + bit, rem, mask)

    walk("", [len(t.constraints) for t in terms], all_mask)
    return PrefixFreeSet(out)


def union_measure(terms: Sequence[CylinderConstraintSet]) -> Fraction:
    """Measure of the union by enumerating only the constrained positions."""
    positions = sorted({p for t in terms for p, _ in t.constraints})
    index = {p: i for i, p in enumerate(positions)}
    hits = 0
    for m in range(2 ** len(positions)):
        bits = format(m, f"0{len(positions)}b") if positions else ""
        for t in terms:
            if all(bits[index[p]] == b for p, b in t.constraints):
                hits += 1
                break
    return Fraction(hits, 2 ** len(positions))


def _dyadic_bits(alpha: Fraction) -> str:
    """Binary digits of a dyadic alpha in [0, 1)."""
    den = alpha.denominator
    if den & (den - 1):
        raise NonDyadicAlpha(f"{alpha} is not dyadic")
    t = den.bit_length() - 1
    return format(alpha.numerator, f"0{t}b") if t else ""


def b_terms(n: int, alpha: Fraction, pairing: CoordinatePairing = PAIRING
            ) -> list[CylinderConstraintSet]:
    """Disjoint constraint sets tiling {X : coordinate n lies in [0, alpha)}.

    For each 1-digit of alpha at fractional position i, one piece fixes the
    first i-1 digits to alpha's and the i-th to 0.
    """
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1:
        return [CylinderConstraintSet(())]
    bits = _dyadic_bits(alpha)
    terms = []
    for i, digit in enumerate(bits, start=1):
        if digit == "1":
            cons = [(pairing.position(n, j), bits[j]) for j in range(i - 1)]
            cons.append((pairing.position(n, i - 1), "0"))
            terms.append(CylinderConstraintSet(cons))
    return terms


def b_set(n: int, alpha: Fraction, pairing: CoordinatePairing = PAIRING) -> PrefixFreeSet:
    """Generator set of the coordinate interval event, with measure alpha."""
    return union_generators(b_terms(n, alpha, pairing))


def series_to_open(f: DyadicFunction, pairing: CoordinatePairing = PAIRING
                   ) -> tuple[PrefixFreeSet, Fraction, Report]:
    """Union of coordinate events B_(n, f(n)); independence gives the product law.

    Returns the generator set, the product measure 1 - prod(1 - f(n)), and a
    report asserting the generator-set measure equals it exactly.
    """
    terms = []
    product = ONE
    for n, v in f.entries:
        if not isinstance(n, int):
            raise ValueError("series must be indexed by naturals")
        if v > 1:
            raise ValueOverOne(f"f({n}) = {v} > 1")
        terms.extend(b_terms(n, v, pairing))
        product *= 1 - v
    u = union_generators(terms)
    expected = 1 - product
    rep = Report("series-to-open")
    rep.put("pairing", pairing.rule)
    rep.check("measure(U) == 1 - prod(1 - f(n))", measure(u), "==", expected)
    return u, expected, rep


def open_to_series_sup(v: PrefixFreeSet, n: int,
                       pairing: CoordinatePairing = PAIRING) -> Fraction:
    """Largest dyadic alpha on the visible grid with B_(n, alpha) inside [V].

    The grid step is 2^-t where t counts the positions of coordinate n that
    fall inside the generator depth of V; for finite V the true supremum is
    dyadic and lies on that grid.
    """
    if measure(v) == 1:
        return ONE
    t = 0
    while pairing.position(n, t) < v.maxlen:
        t += 1
    for m in range(2 ** t, 0, -1):
        alpha = Fraction(m, 2 ** t)
        if all(term.covered_by(v) for term in b_terms(n, alpha, pairing)):
            return alpha
    return ZERO


def open_to_series_approx(v: StagedOpenSet, n: int, c: int,
                          pairing: CoordinatePairing = PAIRING) -> Fraction:
    """Largest grid alpha with mu(B_(n, alpha) minus stage n) <= 2^-(n+c).

    Works from the stage-n clopen approximation instead of the full set, the
    price being the 2^-(n+c) leak allowance.
    """
    if n >= len(v.stages):
        raise MissingStage(f"staged set has no stage {n}")
    w = v.stages[n]
    allowance = Fraction(1, 2 ** (n + c))
    t = n + c
    while pairing.position(n, t) < w.maxlen:
        t += 1
    for m in range(2 ** t, -1, -1):
        alpha = Fraction(m, 2 ** t)
        terms = b_terms(n, alpha, pairing)
        covered = sum(
            (Fraction(space.cylinder_measure(s)) * term.conditional_measure(s)
             for term in terms for s in w.elements),
            start=ZERO,
        )
        if alpha - covered <= allowance:
            return alpha
    return ZERO


def vn_from_g(g: DyadicFunction, n: int) -> tuple[PrefixFreeSet, Report]:
    """Threshold set V_n = {sigma : g(sigma) > 2^-|sigma| n/2}, bounded by 2S/n."""
    if n < 1:
        raise ValueError("need n >= 1")
    if any(not isinstance(k, str) for k in g.support()):
        raise ValueError("needs a string-indexed series")
    chosen = [s for s, val in g.entries
              if val > Fraction(n, 2) * space.cylinder_measure(s)]
    v = space.reduce(chosen)
    total = g.declared_sum
    rep = Report("vn-from-g")
    rep.put("n", n)
    rep.put("sum", total)
    rep.check("measure(V_n) <= 2S/n", measure(v), "<=", 2 * total / n)
    return v, rep


def f_from_test(test: TestFamily) -> tuple[DyadicFunction, Report]:
    """f(sigma) = 2^-|sigma| * (largest level index listing sigma).

    The sum is dominated by sum over n of n * mu(level n), reported exactly.
    """
    best: dict[str, int] = {}
    for n in test.indices():
        for s in test.levels[n]:
            best[s] = max(best.get(s, 0), n)
    f = DyadicFunction({s: Fraction(n, 2 ** len(s)) for s, n in best.items()})
    bound = sum(
        (n * measure(test.levels[n]) for n in test.indices()), start=ZERO
    )
    rep = Report("f-from-test")
    rep.check("sum f <= sum n * mu(level n)", f.declared_sum, "<=", bound)
    return f, rep


class BlockDoubler(BettingStrategy):
    """Reserves q 2^-a_i per index and doubles it on zeros across block i.

    On the interval assigned to (i, a_i) the reserved amount rides
    double-or-nothing on the bit being 0; one wrong bit forfeits exactly the
    reserve.  Elsewhere the strategy does not bet.  Reserves total q times
    the series sum < 1, so the capital stays positive.
    """

    kind = "block-doubler"

    def __init__(self, exponents: Sequence[int], q: Fraction,
                 partition: IntervalPartition = PARTITION):
        super().__init__()
        self.exponents = tuple(int(a) for a in exponents)
        self.q = Fraction(q)
        self.partition = partition
        reserved = sum((self.q * Fraction(1, 2 ** a) for a in self.exponents),
                       start=ZERO)
        if reserved > 1:
            raise WeightTooLarge(
                f"reserves {reserved} exceed the unit starting capital")
        self._bets: dict[int, tuple[int, Fraction]] = {}
        for i, a in enumerate(self.exponents):
            blk = partition.block(i, a)
            for p in blk:
                self._bets[p] = (i, self.q * Fraction(1, 2 ** a))

    def _compute(self, sigma: str) -> Fraction:
        capital = ONE
        stakes: dict[int, Fraction] = {}
        for pos, bit in enumerate(sigma):
            bet = self._bets.get(pos)
            if bet is None:
                continue
            i, reserve = bet
            stake = stakes.setdefault(i, reserve)
            if stake == 0:
                continue
            if bit == "0":
                capital += stake
                stakes[i] = 2 * stake
            else:
                capital -= stake
                stakes[i] = ZERO
        return capital

    def flat_beyond(self, sigma: str) -> bool:
        return not self._bets or len(sigma) > max(self._bets)

    def params(self) -> dict:
        return {"exponents": list(self.exponents), "q": self.q}


def encode_series(exponents: Sequence[int], q: Fraction,
                  partition: IntervalPartition = PARTITION
                  ) -> tuple[PrefixFreeSet, BettingStrategy, Report]:
    """All-zero interval blocks for each exponent, plus the doubling strategy.

    Requires sum 2^-a_i < 1/q.  Certifies the product-law measure of the
    union and, per index, that the worst-case capital at the end of block i
    over all bit choices outside it is still at least q: block gains and
    losses are independent across blocks, and a loss costs exactly the
    reserve, so the worst case is exact arithmetic, not sampling.
    """
    q = Fraction(q)
    if q <= 1:
        raise InvalidThreshold("need q > 1")
    exponents = [int(a) for a in exponents]
    weight = sum((Fraction(1, 2 ** a) for a in exponents), start=ZERO)
    if weight >= 1 / q:
        raise WeightTooLarge(f"sum 2^-a_i = {weight} >= 1/q = {1 / q}")
    zsets = [
        CylinderConstraintSet([(p, "0") for p in partition.block(i, a)])
        for i, a in enumerate(exponents)
    ]
    u = union_generators(zsets)
    product = ONE
    for a in exponents:
        product *= 1 - Fraction(1, 2 ** a)
    rep = Report("encode-series")
    rep.put("partition", partition.rule)
    rep.put("q", q)
    rep.put("reserved_total", q * weight)
    rep.check("measure(U) == 1 - prod(1 - 2^-a_i)", measure(u), "==", 1 - product)
    d = BlockDoubler(exponents, q, partition)
    for i, a in enumerate(exponents):
        end = partition.block(i, a).stop
        loss = sum(
            (q * Fraction(1, 2 ** aj) for j, aj in enumerate(exponents)
             if j != i and partition.block(j, aj).start < end),
            start=ZERO,
        )
        worst = 1 + q * (1 - Fraction(1, 2 ** a)) - loss
        rep.check(f"worst capital at end of block {i} >= q", worst, ">=", q)
    return u, d, rep


class ExtractionResult:
    __slots__ = ("block_lengths", "series", "report")

    def __init__(self, block_lengths, series, report):
        self.block_lengths = block_lengths
        self.series = series
        self.report = report


def extract_series(w: PrefixFreeSet, count: int, lmax: int,
                   partition: IntervalPartition = PARTITION) -> ExtractionResult:
    """Read a dominating series back off a bounded cover.

    b_i is the least block length l <= lmax whose all-zero block sits inside
    [W]; g(i) = 2^-b_i.  Indices with no covered block at the horizon get an
    infinity marker (None) and contribute 0 to the series.
    """
    if measure(w) >= 1:
        raise Unbounded("need measure(W) < 1")
    lengths: list[int | None] = []
    values = {}
    product = ONE
    for i in range(count):
        found = None
        for l in range(1, lmax + 1):
            z = CylinderConstraintSet([(p, "0") for p in partition.block(i, l)])
            if z.covered_by(w):
                found = l
                break
        lengths.append(found)
        if found is not None:
            values[i] = Fraction(1, 2 ** found)
            product *= 1 - Fraction(1, 2 ** found)
    rep = Report("extract-series")
    rep.put("block_lengths", [l if l is not None else "infinity" for l in lengths])
    rep.check("1 - prod(1 - 2^-b_i) <= measure(W)", 1 - product, "<=", measure(w))
    return ExtractionResult(tuple(lengths), DyadicFunction(values), rep)


def tree_embed(d: BettingStrategy, depth: int, budget: int = 10
               ) -> tuple[dict[str, str], Report]:
    """Embed the full binary tree while pinning the capital below 2.

    Each node's image extends its parent's by a pair of incomparable strings
    along which the capital never exceeds 2 - 2^-(k+1); breadth-first,
    shortest then leftmost, so the map is deterministic.  budget caps the
    extension length searched per step.
    """
    if d.value("") != 1:
        raise ValueError("tree embedding needs a normed strategy")
    mapping = {"": ""}
    for k in range(depth):
        bound = 2 - Fraction(1, 2 ** (k + 1))
        for node in sorted((s for s in mapping if len(s) == k), key=lenlex_key):
            tau = mapping[node]
            frontier = [tau]
            kept: list[str] = []
            pair = None
            while frontier and pair is None:
                nxt = []
                for parent in frontier:
                    for bit in "01":
                        cand = parent + bit
                        if d.value(cand) > bound:
                            continue
                        for other in kept:
                            if not cand.startswith(other) and not other.startswith(cand):
                                pair = (other, cand)
                                break
                        if pair:
                            break
                        kept.append(cand)
                        nxt.append(cand)
                    if pair:
                        break
                if nxt and len(nxt[0]) - len(tau) >= budget:
                    break
                frontier = nxt
            if pair is None:
                raise SearchExhausted(
                    f"no incomparable pair below {bound} within {budget} bits of {tau!r}",
                    frontier=kept,
                )
            mapping[node + "0"] = pair[0]
            mapping[node + "1"] = pair[1]
    rep = Report("tree-embed")
    names = sorted(mapping, key=lenlex_key)
    rep.record("monotone strict extensions", all(
        mapping[s + b].startswith(mapping[s]) and len(mapping[s + b]) > len(mapping[s])
        for s in names for b in "01" if s + b in mapping
    ))
    incomparable = True
    for a in names:
        for b in names:
            if a < b and not a.startswith(b) and not b.startswith(a):
                ta, tb = mapping[a], mapping[b]
                if ta.startswith(tb) or tb.startswith(ta):
                    incomparable = False
    rep.record("incomparability preserved", incomparable)
    worst_overall = ZERO
    for s in names:
        tau = mapping[s]
        worst = max(d.value(tau[:i]) for i in range(len(tau) + 1))
        worst_overall = max(worst_overall, worst)
        rep.check(f"capital along image of {s!r} <= 2 - 2^-|{s}|",
                  worst, "<=", 2 - Fraction(1, 2 ** len(s)))
    rep.check("capital on all images <= 2", worst_overall, "<=", Fraction(2))
    return mapping, rep
