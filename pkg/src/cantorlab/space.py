"""Exact rational measure theory on finite cylinder algebras.

Points of Cantor space are infinite binary sequences; the only ones handled
here are eventually periodic (PeriodicPoint), which keeps every membership
and tail question finite.  Open sets are handled through finite prefix-free
generator sets (PrefixFreeSet); all measures are Fractions, never floats.

Bit strings are plain Python str over the alphabet {'0', '1'}; the empty
string is the root cylinder (the whole space).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator

from .errors import PowerOfEpsilon

ZERO = Fraction(0)
ONE = Fraction(1)


def check_bits(s: str) -> str:
    if not isinstance(s, str) or s.strip("01") != "":
        raise ValueError(f"not a bit string: {s!r}")
    return s


def lenlex_key(s: str) -> tuple[int, str]:
    """Canonical (length, lexicographic) ordering used for all serialization."""
    return (len(s), s)


def cylinder_measure(s: str) -> Fraction:
    return Fraction(1, 2 ** len(s))


class PrefixFreeSet:
    """Finite antichain of bit strings; stands in for a c.e. open set.

    Elements are deduplicated, validated pairwise prefix-free and stored in
    length-lex order.  Instances are immutable and hashable.
    """

    __slots__ = ("elements",)

    def __init__(self, elements: Iterable[str] = ()):
        elems = sorted({check_bits(e) for e in elements})
        # In lexicographic order a prefix violation always shows up between
        # neighbours, so one adjacent sweep suffices.
        for a, b in zip(elems, elems[1:]):
            if b.startswith(a):
                raise ValueError(f"not prefix-free: {a!r} is a prefix of {b!r}")
        elems.sort(key=lenlex_key)
        object.__setattr__(self, "elements", tuple(elems))

    def __setattr__(self, name, value):
        raise AttributeError("PrefixFreeSet is immutable")

    def __iter__(self) -> Iterator[str]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, s: str) -> bool:
        return s in set(self.elements)

    def __eq__(self, other) -> bool:
        return isinstance(other, PrefixFreeSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(("PrefixFreeSet", self.elements))

    def __repr__(self) -> str:
        return f"PrefixFreeSet({list(self.elements)!r})"

    @property
    def maxlen(self) -> int:
        return max((len(e) for e in self.elements), default=0)


EMPTY_SET = PrefixFreeSet()
FULL_SET = PrefixFreeSet([""])


def reduce(strings: Iterable[str]) -> PrefixFreeSet:
    """Prefix-minimal elements of an arbitrary finite string set.

    The generated open set is unchanged: dropping a string that extends a
    kept one removes nothing from the union of cylinders.
    """
    elems = sorted({check_bits(s) for s in strings})
    kept: list[str] = []
    for s in elems:
        if kept and s.startswith(kept[-1]):
            continue
        kept.append(s)
    return PrefixFreeSet(kept)


def measure(u: PrefixFreeSet) -> Fraction:
    """mu([U]) = sum over generators of 2^-|sigma|, exactly."""
    if not u.elements:
        return ZERO
    top = u.maxlen
    total = sum(2 ** (top - len(s)) for s in u.elements)
    return Fraction(total, 2 ** top)


def condition(u: PrefixFreeSet, sigma: str) -> PrefixFreeSet:
    """The set (U | sigma) = {tau : sigma tau in U}, as tails at the root.

    Full conditionals are canonicalized to {epsilon}: when a prefix of sigma
    lies in U, and likewise when the suffixes alone exhaust the space, the
    cylinder [sigma] is swallowed whole.  Either way the identity
    mu(condition(U, sigma)) * 2^-|sigma| = mu([U] cap [sigma]) stays exact.
    """
    check_bits(sigma)
    suffixes = []
    for s in u.elements:
        if sigma.startswith(s):
            return FULL_SET
        if s.startswith(sigma):
            suffixes.append(s[len(sigma):])
    out = PrefixFreeSet(suffixes)
    if measure(out) == 1:
        return FULL_SET
    return out


def power(u: PrefixFreeSet, n: int) -> PrefixFreeSet:
    """n-fold concatenation set U^n; mu(U^n) = mu(U)^n for prefix-free U."""
    if n < 0:
        raise ValueError("negative power")
    if n >= 2 and "" in u:
        raise PowerOfEpsilon("epsilon in U makes U^n degenerate for n >= 2")
    words = [""]
    for _ in range(n):
        words = [w + s for w in words for s in u.elements]
    return PrefixFreeSet(words)


def union(u: PrefixFreeSet, v: PrefixFreeSet) -> PrefixFreeSet:
    return reduce(list(u.elements) + list(v.elements))


def covers(v: PrefixFreeSet, u: PrefixFreeSet) -> bool:
    """Decidable containment [U] subseteq [V] for finite generator sets.

    [sigma] subseteq [V] iff the conditional measure of V by sigma is 1,
    which is exact rational arithmetic here.
    """
    return all(measure(condition(v, s)) == 1 for s in u.elements)


def intersection_measure(u: PrefixFreeSet, v: PrefixFreeSet) -> Fraction:
    """mu([U] cap [V]) via conditioning on the generators of U."""
    return sum(
        (measure(condition(v, s)) * cylinder_measure(s) for s in u.elements),
        start=ZERO,
    )


class PeriodicPoint:
    """Eventually periodic point head . period^omega of Cantor space.

    These are the only infinite sequences the laboratory manipulates: the
    set of tails of such a point is finite, so 'all tails of X' questions
    are decidable.
    """

    __slots__ = ("head", "period")

    def __init__(self, head: str, period: str):
        check_bits(head)
        check_bits(period)
        if not period:
            raise ValueError("period must be nonempty")
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "period", period)

    def __setattr__(self, name, value):
        raise AttributeError("PeriodicPoint is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PeriodicPoint)
            and self.head == other.head
            and self.period == other.period
        )

    def __hash__(self) -> int:
        return hash(("PeriodicPoint", self.head, self.period))

    def __repr__(self) -> str:
        return f"PeriodicPoint({self.head!r}, {self.period!r})"

    def prefix(self, n: int) -> str:
        if n <= len(self.head):
            return self.head[:n]
        need = n - len(self.head)
        reps = -(-need // len(self.period))
        return (self.head + self.period * reps)[:n]

    def shift(self, k: int) -> "PeriodicPoint":
        """Drop the first k bits."""
        if k <= len(self.head):
            return PeriodicPoint(self.head[k:], self.period)
        r = (k - len(self.head)) % len(self.period)
        return PeriodicPoint("", self.period[r:] + self.period[:r])

    def canonical(self) -> "PeriodicPoint":
        """Unique representative: primitive period, head not absorbable.

        Two PeriodicPoints denote the same sequence iff their canonical
        forms are equal.
        """
        period = self.period
        for d in range(1, len(period)):
            if len(period) % d == 0 and period == period[:d] * (len(period) // d):
                period = period[:d]
                break
        head = self.head
        while head and head[-1] == period[-1]:
            head = head[:-1]
            period = period[-1] + period[:-1]
        return PeriodicPoint(head, period)


def tails(x: PeriodicPoint) -> list[PeriodicPoint]:
    """All distinct tails: shifts through the head, then period rotations."""
    seen = set()
    out = []
    for k in range(len(x.head) + len(x.period)):
        t = x.shift(k)
        key = t.canonical()
        if key not in seen:
            seen.add(key)
            out.append(t)
    return out


def member(u: PrefixFreeSet, x: PeriodicPoint) -> bool:
    """X in [U]: some generator is a prefix of X (only finitely many matter)."""
    return any(x.prefix(len(s)) == s for s in u.elements)


class StagedOpenSet:
    """Monotone finite enumeration of a prefix-free set with exact measures.

    The desk-scale stand-in for a Schnorr (computable-measure) set: stage s
    is the part enumerated so far, and the declared final measure equals the
    measure of the last stage exactly.
    """

    __slots__ = ("stages", "final_measure")

    def __init__(self, stages: Iterable[PrefixFreeSet], final_measure: Fraction | None = None):
        st = tuple(stages)
        if not st:
            raise ValueError("need at least one stage")
        for a, b in zip(st, st[1:]):
            if not covers(b, a):
                raise ValueError("stages must be nondecreasing as open sets")
        final = measure(st[-1])
        if final_measure is not None and final_measure != final:
            raise ValueError(
                f"declared final measure {final_measure} != measure of last stage {final}"
            )
        object.__setattr__(self, "stages", st)
        object.__setattr__(self, "final_measure", final)

    def __setattr__(self, name, value):
        raise AttributeError("StagedOpenSet is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, StagedOpenSet) and self.stages == other.stages

    def __hash__(self) -> int:
        return hash(("StagedOpenSet", self.stages))

    def __repr__(self) -> str:
        return f"StagedOpenSet({list(self.stages)!r})"

    @property
    def final(self) -> PrefixFreeSet:
        return self.stages[-1]

    def stage(self, s: int) -> PrefixFreeSet:
        """Stage s, clamped to the last one for s past the enumeration."""
        if s < 0:
            raise ValueError("negative stage")
        return self.stages[min(s, len(self.stages) - 1)]
