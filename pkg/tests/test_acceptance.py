"""Acceptance gate: ten randomized batteries, every bound exact, zero failures.

Each criterion prints one PASS line with its instance count and elapsed time
and enforces its wall-clock budget.  All randomness is seeded, so reports
are reproducible run to run.
"""

import time
from fractions import Fraction
from random import Random

from cantorlab.closure import MLRProvider, p2_mlr, p2_sr, p3_cr, p3_mlr
from cantorlab.coding import (
    DyadicFunction,
    KCRequestList,
    ceil_log2,
    complexity,
    g_to_machine,
    kc_build,
)
from cantorlab.covers import TestFamily, schnorr_merge
from cantorlab.diagonal import run as run_lemma
from cantorlab.errors import NoEscape
from cantorlab.martingales import (
    ConstantStrategy,
    MixtureStrategy,
    PointDoubler,
    average_truncated,
    positive_shift,
    reset,
    verify_ville_kolmogorov,
    winning_set,
)
from cantorlab.reports import dumps
from cantorlab.serialize import to_doc
from cantorlab.series import (
    PARTITION,
    encode_series,
    extract_series,
    open_to_series_sup,
    series_to_open,
    tree_embed,
    vn_from_g,
)
from cantorlab.space import (
    PeriodicPoint,
    PrefixFreeSet,
    StagedOpenSet,
    condition,
    covers,
    measure,
    member,
    power,
    tails,
    union,
)

from util import (
    doubler,
    random_fair_strategy,
    random_fair_table,
    random_prefix_free,
)


class Budget:
    def __init__(self, name, seconds):
        self.name = name
        self.seconds = seconds
        self.start = time.monotonic()

    def done(self, detail):
        elapsed = time.monotonic() - self.start
        assert elapsed < self.seconds, (
            f"{self.name}: {elapsed:.1f}s exceeded budget {self.seconds}s")
        print(f"ACCEPTANCE {self.name}: PASS ({detail}; {elapsed:.2f}s < {self.seconds}s)")


def test_criterion_01_ville_kolmogorov_suite():
    budget = Budget("1 Ville-Kolmogorov", 60)
    rng = Random(20101)
    for case in range(200):
        table = random_fair_table(rng, 8, positive=True)
        sigma = "".join(rng.choice("01") for _ in range(rng.randint(0, 7)))
        q = Fraction(rng.randint(9, 64), 8)
        rep = verify_ville_kolmogorov(table, sigma, q)
        assert rep.passed, f"case {case}: {rep!r}"
    budget.done("200 random fair tables of depth 8, exact bound, 0 failures")


def test_criterion_02_power_law():
    budget = Budget("2 power law", 5)
    rng = Random(20202)
    for case in range(100):
        u = random_prefix_free(rng, maxlen=4, count=8)
        n = rng.randint(0, 5)
        if "" in u and n >= 2:
            u = PrefixFreeSet(["0", "10"])
        assert measure(power(u, n)) == measure(u) ** n, f"case {case}"
    budget.done("100 random prefix-free sets, n <= 5, exact equality")


def _schnorr_fixture(x: PeriodicPoint, decoy: PeriodicPoint | None, n_max: int):
    if decoy is None:
        levels = {n: PrefixFreeSet([x.prefix(n)]) for n in range(n_max + 1)}
    else:
        levels = {n: PrefixFreeSet([x.prefix(n + 1), decoy.prefix(n + 1)])
                  for n in range(n_max + 1)}
    return TestFamily("Schnorr", levels)


def test_criterion_03_schnorr_merge():
    budget = Budget("3 Schnorr merge", 10)
    points = [
        PeriodicPoint("", "0"), PeriodicPoint("", "1"),
        PeriodicPoint("0", "1"), PeriodicPoint("1", "0"),
        PeriodicPoint("", "01"), PeriodicPoint("", "10"),
        PeriodicPoint("01", "0"), PeriodicPoint("10", "1"),
        PeriodicPoint("0", "10"), PeriodicPoint("1", "01"),
    ]
    count = 0
    for x in points:
        for k_max in (2, 3):
            decoy = None if count % 2 else PeriodicPoint(
                "1" if x.prefix(1) == "0" else "0", x.period)
            if decoy is not None and decoy.prefix(1) == x.prefix(1):
                decoy = None
            fam = _schnorr_fixture(x, decoy, 3 * k_max + 2)
            merged, rep = schnorr_merge(fam, k_max, point=x)
            assert rep.passed
            bound = sum(Fraction(1, 2 ** (k + 2)) for k in range(k_max + 1))
            assert measure(merged) <= bound <= Fraction(1, 2)
            assert rep.data["point_in_all_levels"]
            for t in tails(x):
                assert member(merged, t)
            count += 1
    assert count >= 20
    budget.done(f"{count} Schnorr fixtures, K <= 3, exact layer bounds, all tails covered")


def test_criterion_04_reset_martingale():
    budget = Budget("4 reset martingale", 30)
    rng = Random(20404)
    done = 0
    while done < 50:
        d = random_fair_strategy(rng, 4, positive=True)
        q = Fraction(rng.randint(9, 14), 8)
        blocks = winning_set(d, q, 4).generators
        if not 1 <= len(blocks) <= 3:
            continue
        strat = reset(d, q, blocks)
        words = [""]
        for k in range(1, 5):
            words = [w + b for w in words for b in blocks]
            for w in words:
                assert strat.value(w) >= q ** k, (w, k)
        done += 1
    budget.done("50 (d, q, U) fixtures, all block words to k=4, capital >= q^k exact")


def _random_staged(rng: Random, final: PrefixFreeSet) -> StagedOpenSet:
    elems = list(final.elements)
    rng.shuffle(elems)
    stages = [PrefixFreeSet(elems[: i + 1]) for i in range(len(elems))]
    return StagedOpenSet(tuple(stages or [final]))


def test_criterion_05_closure_suite():
    budget = Budget("5 closure suite", 60)
    rng = Random(20505)

    done = 0
    while done < 100:  # p2_mlr
        u = random_prefix_free(rng, maxlen=5, count=5)
        mu = measure(u)
        if not 0 < mu < 1:
            continue
        q = (mu + 1) / 2
        v, rep = p2_mlr(u, q)
        assert rep.passed
        assert measure(v) <= mu / q
        done += 1

    done = 0
    while done < 100:  # p2_sr
        final = random_prefix_free(rng, maxlen=4, count=4)
        k = rng.randint(1, 3)
        if measure(final) >= 1 - Fraction(1, 2 ** k):
            continue
        staged = _random_staged(rng, final)
        depth = max(2, final.maxlen)
        v, rep = p2_sr(staged, k, depth)
        assert rep.passed
        assert measure(union(v, final)) - measure(final) < Fraction(1, 2 ** k)
        done += 1

    done = 0
    while done < 100:  # p3_mlr
        u = random_prefix_free(rng, maxlen=4, count=3)
        sigma = "".join(rng.choice("01") for _ in range(rng.randint(0, 2)))
        m = measure(condition(u, sigma))
        k = rng.randint(1, 3)
        if m >= 1 - Fraction(1, 2 ** k):
            continue
        n_e = len(sigma) + k
        level = PrefixFreeSet(["1" * n_e]) if n_e else PrefixFreeSet([""])
        test = TestFamily("ML", {n_e: level})
        got_n, v, rep = p3_mlr(u, sigma, k, test)
        assert got_n == n_e and rep.passed
        assert covers(v, u) and covers(v, level)
        assert measure(condition(v, sigma)) < 1
        done += 1

    done = 0
    while done < 100:  # p3_cr
        d = random_fair_strategy(rng, 5, positive=True)
        d_e = random_fair_strategy(rng, 5, positive=True)
        q = Fraction(rng.randint(9, 16), 8)
        sigma = "".join(rng.choice("01") for _ in range(rng.randint(0, 2)))
        if any(d.value(sigma[:i]) >= q for i in range(len(sigma) + 1)):
            continue
        n_e, v, rep = p3_cr(d, q, sigma, d_e, 5)
        assert rep.passed
        assert covers(v.generators, winning_set(d, q, 5).generators)
        assert covers(v.generators, winning_set(d_e, Fraction(2 ** n_e), 5).generators)
        assert measure(condition(v.generators, sigma)) < 1
        done += 1

    budget.done("100 random instances each of p2_mlr, p2_sr, p3_mlr, p3_cr, 0 failures")


def _ml_toward_zeros(n_max):
    return TestFamily("ML", {n: PrefixFreeSet(["0" * n]) for n in range(n_max + 1)})


def test_criterion_06_diagonalizer_golden_traces():
    budget = Budget("6 diagonalizer", 10)
    tests = [_ml_toward_zeros(8)] * 3

    fixtures = [
        (PrefixFreeSet(["1"]), "111"),
        (PrefixFreeSet(["0", "1"]), None),
    ]
    for w, expected in fixtures:
        renders = []
        for _ in range(2):
            trace, rep = run_lemma(w, MLRProvider(q=Fraction(3, 4), k=1), tests, 3)
            assert rep.passed
            assert len(trace.stages) == 4
            if expected is not None:
                assert trace.final_sigma == expected
            renders.append(dumps({"trace": to_doc(trace), "report": rep.to_doc()}))
        assert renders[0] == renders[1], "reports not byte-identical"

    covering = TestFamily("ML", {1: PrefixFreeSet(["0"])})
    try:
        run_lemma(PrefixFreeSet(["0"]), MLRProvider(k=1), [covering], 1)
        raise AssertionError("expected NoEscape")
    except NoEscape as err:
        assert err.stage == 0
        assert err.certificate.passed
    budget.done("two E=3 golden traces byte-identical, covering fixture -> NoEscape")


def test_criterion_07_coder_suite():
    budget = Budget("7 coder", 30)
    rng = Random(20707)
    for case in range(500):
        lengths = []
        budget_left = Fraction(1)
        for _ in range(rng.randint(0, 24)):
            k = rng.randint(1, 12)
            if Fraction(1, 2 ** k) <= budget_left:
                lengths.append(k)
                budget_left -= Fraction(1, 2 ** k)
        reqs = KCRequestList(
            [(k, format(i % 8, "03b")) for i, k in enumerate(lengths)])
        machine = kc_build(reqs)  # Machine() rejects non-prefix-free domains
        assert machine.domain_measure == reqs.weight, f"case {case}"
        assert sorted(len(p) for p in machine.table) == sorted(lengths)

    for case in range(60):
        entries = {}
        for i in range(rng.randint(1, 10)):
            t = rng.randint(0, 8)
            entries[format(i, "04b")] = Fraction(rng.randint(1, 2 ** t), 2 ** t)
        g = DyadicFunction(entries)
        c = max(0, ceil_log2(g.declared_sum))
        m, rep = g_to_machine(g, c)
        assert rep.passed
        for sigma, v in g.entries:
            assert complexity(m, sigma) <= ceil_log2(1 / v) + c + 1
    budget.done("500 allocator cases exact; 60 series-to-machine bounds exact")


# Exponent lists are picked so every used interval block materializes: the
# diagonal partition places block (i, l) ever deeper along the antidiagonals
# (e.g. (2, 3) covers positions [29, 32)), and an all-zero block at depth m
# has 2^(m-l) generators, so late blocks are out of reach for any explicit
# generator set.  Within that bound the lists cover support sizes 1..4 and
# every exponent value 1..5.
EXPONENT_LISTS = [
    (1,), (2,), (3,), (4,), (5,),
    (1, 2), (2, 1), (1, 3), (3, 1), (2, 2), (2, 3), (3, 2), (4, 1), (4, 2),
    (4, 3), (3, 3),
    (3, 2, 1), (2, 3, 1), (3, 3, 1), (4, 2, 1), (2, 2, 2), (3, 2, 2),
    (4, 3, 2), (2, 3, 2), (3, 3, 2), (4, 2, 2), (4, 3, 1), (4, 1, 2),
    (3, 1, 2),
    (4, 3, 2, 1),
]


def test_criterion_08_interval_block_round_trip():
    budget = Budget("8 block encoding round trip", 60)
    assert len(EXPONENT_LISTS) == 30
    for exps in EXPONENT_LISTS:
        weight = sum(Fraction(1, 2 ** a) for a in exps)
        assert weight < 1, exps
        q = (1 + 1 / weight) / 2
        u, d, rep = encode_series(exps, q)
        assert rep.passed, exps
        product = Fraction(1)
        for a in exps:
            product *= 1 - Fraction(1, 2 ** a)
        assert measure(u) == 1 - product, exps
        for i, a in enumerate(exps):
            block = set(PARTITION.block(i, a))
            end = PARTITION.block(i, a).stop
            for filler in ("1", "0"):
                head = "".join("0" if p in block else filler for p in range(end))
                x = PeriodicPoint(head, "1")
                assert d.value(x.prefix(end)) >= q, (exps, i, filler)
        res = extract_series(u, len(exps), max(exps))
        assert res.report.passed, exps
        back = Fraction(1)
        for i, a in enumerate(exps):
            b = res.block_lengths[i]
            assert b is not None and b <= a, (exps, i)
            back *= 1 - Fraction(1, 2 ** b)
        assert 1 - back <= measure(u), exps
    budget.done("30 exponent lists: product law, capital >= q, extraction b_i <= a_i")


def test_criterion_09_tree_embedding():
    budget = Budget("9 tree embedding", 30)
    rng = Random(20909)
    strategies = [
        ConstantStrategy(1),
        doubler(),
        positive_shift(doubler()),
        PointDoubler(PeriodicPoint("", "1")),
        PointDoubler(PeriodicPoint("", "01")),
        MixtureStrategy(ConstantStrategy(1), doubler(), 2),
        average_truncated(positive_shift(doubler()), 1),
    ] + [random_fair_strategy(rng, 6, positive=True) for _ in range(3)]
    assert len(strategies) == 10
    for d in strategies:
        mapping, rep = tree_embed(d, 4)
        assert rep.passed
        names = sorted(mapping)
        for s in names:
            tau = mapping[s]
            for i in range(len(tau) + 1):
                assert d.value(tau[:i]) <= 2 - Fraction(1, 2 ** len(s))
                assert d.value(tau[:i]) <= 2
        for a in names:
            for b in names:
                if a < b and not b.startswith(a) and not a.startswith(b):
                    ta, tb = mapping[a], mapping[b]
                    assert not ta.startswith(tb) and not tb.startswith(ta)
    budget.done("10 normed strategies to depth 4, capital bounds exact")


def test_criterion_10_series_extraction():
    budget = Budget("10 series extraction", 30)
    rng = Random(21010)

    done = 0
    while done < 50:  # vn_from_g bound
        entries = {}
        for _ in range(rng.randint(1, 6)):
            s = "".join(rng.choice("01") for _ in range(rng.randint(1, 5)))
            t = rng.randint(0, 6)
            entries[s] = Fraction(rng.randint(0, 2 ** t), 2 ** t)
        g = DyadicFunction(entries)
        if not g.declared_sum:
            continue
        n = rng.randint(1, 8)
        v, rep = vn_from_g(g, n)
        assert rep.passed
        assert measure(v) <= 2 * g.declared_sum / n
        done += 1

    # Product law on the full 2-bit grid over coordinates {0,1,2,3} (support
    # up to 4), then a sample of finer 4-bit values on low coordinates where
    # the generator depth stays tractable.
    grid = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    checked = 0
    for a0 in grid:
        for a1 in grid:
            for a2 in grid:
                for a3 in grid:
                    f = DyadicFunction({0: a0, 1: a1, 2: a2, 3: a3})
                    u, product, rep = series_to_open(f)
                    assert rep.passed
                    assert measure(u) == product
                    checked += 1
    for _ in range(40):
        f = DyadicFunction({
            0: Fraction(rng.randint(0, 16), 16),
            1: Fraction(rng.randint(0, 16), 16),
        })
        u, product, rep = series_to_open(f)
        assert rep.passed
        for n, v in f.entries:
            assert open_to_series_sup(u, n) >= v
        checked += 1

    budget.done(f"50 vn bounds; {checked} series product laws and sups exact")
