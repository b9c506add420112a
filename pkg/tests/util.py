"""Shared fixture builders and brute-force oracles for the test suite."""

from fractions import Fraction
from random import Random

from cantorlab.martingales import MartingaleTable, PointDoubler, TableStrategy
from cantorlab.space import PeriodicPoint, PrefixFreeSet, reduce


def all_strings(depth):
    out = [""]
    frontier = [""]
    for _ in range(depth):
        frontier = [s + b for s in frontier for b in "01"]
        out.extend(frontier)
    return out


def bf_expand(strings, depth):
    out = set()
    for m in range(2 ** depth):
        s = format(m, f"0{depth}b") if depth else ""
        if any(s.startswith(g) for g in strings):
            out.add(s)
    return out


def doubler():
    """All-on-zeros doubler: capital 2^k along 0^k, dead after any 1."""
    return PointDoubler(PeriodicPoint("", "0"))


def random_fair_table(rng: Random, depth: int, positive: bool = False,
                      start: Fraction = Fraction(1)) -> MartingaleTable:
    """Random fair table: each node splits its doubled capital at random.

    With positive=True every node keeps at least 1/8 of the parent's doubled
    capital, so no zero values appear anywhere.
    """
    values = {"": Fraction(start)}
    frontier = [""]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            total = 2 * values[s]
            lo, hi = (1, 7) if positive else (0, 8)
            left = total * Fraction(rng.randint(lo, hi), 8)
            values[s + "0"] = left
            values[s + "1"] = total - left
            nxt.extend([s + "0", s + "1"])
        frontier = nxt
    return MartingaleTable(depth, values)


def random_fair_strategy(rng: Random, depth: int, positive: bool = False):
    return TableStrategy(random_fair_table(rng, depth, positive=positive))


def random_prefix_free(rng: Random, maxlen: int = 5, count: int = 6) -> PrefixFreeSet:
    words = []
    for _ in range(count):
        n = rng.randint(1, maxlen)
        words.append("".join(rng.choice("01") for _ in range(n)))
    return reduce(words)
