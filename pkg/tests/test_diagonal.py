"""Finite-extension construction: golden traces, escape dichotomy, tampering."""

from fractions import Fraction
from random import Random

import pytest

from cantorlab.closure import CRProvider, MLRProvider, SRProvider
from cantorlab.covers import TestFamily
from cantorlab.diagonal import DiagonalTrace, TraceStage, run, verify_trace
from cantorlab.errors import NoEscape
from cantorlab.martingales import winning_set
from cantorlab.reports import dumps
from cantorlab.serialize import to_doc
from cantorlab.space import PrefixFreeSet, condition, measure

from util import doubler, random_prefix_free


def ml_toward_zeros(n_max: int) -> TestFamily:
    return TestFamily("ML", {n: PrefixFreeSet(["0" * n]) for n in range(n_max + 1)})


def schnorr_toward_zeros(n_max: int) -> TestFamily:
    return TestFamily("Schnorr", {n: PrefixFreeSet(["0" * n]) for n in range(n_max + 1)})


def cr_induced_from_doubler(n_max: int, depth: int) -> TestFamily:
    levels = {n: winning_set(doubler(), Fraction(2 ** n), depth).generators
              for n in range(1, n_max + 1)}
    return TestFamily("ML", levels, martingale=doubler())


class TestGoldenRuns:
    def test_mlr_two_stages(self):
        w = PrefixFreeSet(["1"])
        trace, rep = run(w, MLRProvider(q=Fraction(3, 4), k=1),
                         [ml_toward_zeros(6), ml_toward_zeros(6)], 2)
        assert trace.final_sigma == "11"
        assert rep.passed
        assert [s.n_e for s in trace.stages[:-1]] == [1, 2]

    def test_sr_two_stages(self):
        w = PrefixFreeSet(["1"])
        trace, rep = run(w, SRProvider(k=1),
                         [schnorr_toward_zeros(8), schnorr_toward_zeros(8)], 2)
        assert trace.final_sigma == "11"
        assert rep.passed

    def test_cr_two_stages(self):
        w = PrefixFreeSet(["1"])
        tests = [cr_induced_from_doubler(8, 8), cr_induced_from_doubler(8, 8)]
        trace, rep = run(w, CRProvider(depth=8), tests, 2)
        assert trace.final_sigma == "11"
        assert rep.passed

    def test_full_w_always_escapes(self):
        w = PrefixFreeSet(["0", "1"])
        trace, rep = run(w, MLRProvider(), [ml_toward_zeros(8)], 1)
        assert rep.passed
        assert len(trace.final_sigma) == 1

    def test_deterministic_byte_identical(self):
        w = PrefixFreeSet(["1"])
        docs = []
        for _ in range(2):
            trace, rep = run(w, MLRProvider(q=Fraction(3, 4), k=1),
                             [ml_toward_zeros(6)], 3)
            docs.append(dumps({"trace": to_doc(trace), "report": rep.to_doc()}))
        assert docs[0] == docs[1]


class TestNoEscape:
    def test_covered_w_yields_certificate(self):
        w = PrefixFreeSet(["0"])
        test = TestFamily("ML", {1: PrefixFreeSet(["0"])})
        with pytest.raises(NoEscape) as err:
            run(w, MLRProvider(k=1), [test], 1)
        assert err.value.stage == 0
        cert = err.value.certificate
        assert cert.passed
        assert cert.data["covering_generators"] is not None

    def test_escape_dichotomy(self):
        # With W = {0,1}, mu(V|sigma) < 1 forces an escaping child exactly
        # because the conditional measure averages over the two children.
        rng = Random(71)
        for _ in range(50):
            v = random_prefix_free(rng, maxlen=5, count=6)
            sigma = "".join(rng.choice("01") for _ in range(rng.randint(0, 3)))
            m = measure(condition(v, sigma))
            m0 = measure(condition(v, sigma + "0"))
            m1 = measure(condition(v, sigma + "1"))
            assert m == (m0 + m1) / 2
            if m < 1:
                assert m0 < 1 or m1 < 1


class TestVerifyTrace:
    def fixture(self):
        w = PrefixFreeSet(["1"])
        trace, _ = run(w, MLRProvider(q=Fraction(3, 4), k=1),
                       [ml_toward_zeros(6), ml_toward_zeros(6)], 2)
        return w, trace

    def test_rerun_passes(self):
        w, trace = self.fixture()
        assert verify_trace(trace, w, [ml_toward_zeros(6), ml_toward_zeros(6)]).passed

    def test_foreign_tau_flagged(self):
        w, trace = self.fixture()
        bad = list(trace.stages)
        s0 = bad[0]
        bad[0] = TraceStage(s0.index, s0.sigma, s0.current, s0.n_e, "0")
        tampered = DiagonalTrace(trace.case, tuple(bad))
        rep = verify_trace(tampered, w, [ml_toward_zeros(6)])
        assert not rep.passed

    def test_monotonicity_violation_flagged(self):
        w, trace = self.fixture()
        bad = list(trace.stages)
        last = bad[-1]
        bad[-1] = TraceStage(last.index, last.sigma, PrefixFreeSet(["0101"]),
                             last.n_e, last.tau)
        tampered = DiagonalTrace(trace.case, tuple(bad))
        rep = verify_trace(tampered, w, [ml_toward_zeros(6)])
        assert not rep.passed
