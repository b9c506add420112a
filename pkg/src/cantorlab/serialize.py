"""Structured-text (JSON) forms of the domain objects.

Rationals travel as exact "num/den" strings (plain integers when whole),
sets as {"elements": [...]}, points as {"head": ..., "period": ...},
martingale tables as {"depth": D, "values": {...}}, strategies as tagged
records naming their kind.  parse_* functions are the inverse direction
used by the batch front door.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from . import martingales as mg
from . import series as sr
from .coding import DyadicFunction, KCRequestList, Machine
from .covers import TestFamily
from .diagonal import DiagonalTrace, TraceStage
from .errors import ParseError
from .space import PeriodicPoint, PrefixFreeSet, StagedOpenSet


def frac_str(f: Fraction) -> str:
    return str(Fraction(f))


def parse_fraction(doc: Any) -> Fraction:
    try:
        if isinstance(doc, int):
            return Fraction(doc)
        if isinstance(doc, str):
            return Fraction(doc)
    except (ValueError, ZeroDivisionError) as err:
        raise ParseError(f"bad rational {doc!r}: {err}") from None
    raise ParseError(f"bad rational {doc!r}")


def to_doc(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, PrefixFreeSet):
        return {"elements": list(obj.elements)}
    if isinstance(obj, PeriodicPoint):
        return {"head": obj.head, "period": obj.period}
    if isinstance(obj, StagedOpenSet):
        return {"stages": [to_doc(s) for s in obj.stages],
                "final_measure": frac_str(obj.final_measure)}
    if isinstance(obj, mg.MartingaleTable):
        return {"depth": obj.depth,
                "values": {s: frac_str(v) for s, v in sorted(obj.values.items())}}
    if isinstance(obj, mg.BettingStrategy):
        return strategy_doc(obj)
    if isinstance(obj, mg.WinningSet):
        return {"threshold": frac_str(obj.threshold),
                "generators": to_doc(obj.generators),
                "source_depth": obj.source_depth,
                "truncated": obj.truncated}
    if isinstance(obj, TestFamily):
        doc = {"kind": obj.kind,
               "levels": {str(n): to_doc(s) for n, s in obj.levels.items()}}
        if obj.bound_schedule is not None:
            doc["bounds"] = {str(n): frac_str(v) for n, v in obj.bound_schedule.items()}
        return doc
    if isinstance(obj, Machine):
        return {"table": dict(obj.table)}
    if isinstance(obj, KCRequestList):
        return {"requests": [[k, s] for k, s in obj.requests]}
    if isinstance(obj, DyadicFunction):
        return {"values": [[k, frac_str(v)] for k, v in obj.entries],
                "sum": frac_str(obj.declared_sum)}
    if isinstance(obj, sr.CylinderConstraintSet):
        return {"constraints": [[p, b] for p, b in obj.constraints]}
    if isinstance(obj, TraceStage):
        return {"index": obj.index, "sigma": obj.sigma,
                "set": to_doc(obj.current), "n_e": obj.n_e, "tau": obj.tau}
    if isinstance(obj, DiagonalTrace):
        return {"case": obj.case, "stages": [to_doc(s) for s in obj.stages]}
    if isinstance(obj, (list, tuple)):
        return [to_doc(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_doc(v) for k, v in obj.items()}
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    raise ParseError(f"cannot serialize {type(obj).__name__}")


def strategy_doc(d: mg.BettingStrategy) -> dict:
    doc: dict[str, Any] = {"kind": d.kind}
    if isinstance(d, mg.ConstantStrategy):
        doc["c"] = frac_str(d.c)
    elif isinstance(d, mg.TableStrategy):
        doc["table"] = to_doc(d.table)
    elif isinstance(d, mg.PointDoubler):
        doc["point"] = to_doc(d.point)
    elif isinstance(d, mg.TranslateStrategy):
        doc["base"] = strategy_doc(d.base)
        doc["sigma"] = d.sigma
    elif isinstance(d, mg.ScaledStrategy):
        doc["base"] = strategy_doc(d.base)
        doc["factor"] = frac_str(d.factor)
    elif isinstance(d, mg.BlendStrategy):
        doc["terms"] = [[frac_str(w), strategy_doc(s)] for w, s in d.terms]
    elif isinstance(d, mg.MixtureStrategy):
        doc["d"] = strategy_doc(d.d)
        doc["d_e"] = strategy_doc(d.d_e)
        doc["n_e"] = d.n_e
    elif isinstance(d, mg.AverageStrategy):
        doc["base"] = strategy_doc(d.base)
        doc["level"] = d.level
    elif isinstance(d, mg.ResetStrategy):
        doc["base"] = strategy_doc(d.base)
        doc["q"] = frac_str(d.q)
        doc["blocks"] = to_doc(d.blocks)
    elif isinstance(d, sr.BlockDoubler):
        doc["exponents"] = list(d.exponents)
        doc["q"] = frac_str(d.q)
    else:
        raise ParseError(f"cannot serialize strategy kind {d.kind!r}")
    return doc


def _need(doc: Any, key: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"missing field {key!r}")
    return doc[key]


def parse_set(doc: Any) -> PrefixFreeSet:
    try:
        return PrefixFreeSet(_need(doc, "elements"))
    except ValueError as err:
        raise ParseError(str(err)) from None


def parse_point(doc: Any) -> PeriodicPoint:
    try:
        return PeriodicPoint(_need(doc, "head"), _need(doc, "period"))
    except ValueError as err:
        raise ParseError(str(err)) from None


def parse_staged(doc: Any) -> StagedOpenSet:
    try:
        stages = tuple(parse_set(s) for s in _need(doc, "stages"))
        declared = doc.get("final_measure")
        return StagedOpenSet(
            stages, None if declared is None else parse_fraction(declared))
    except ValueError as err:
        raise ParseError(str(err)) from None


def parse_table(doc: Any) -> mg.MartingaleTable:
    try:
        values = {s: parse_fraction(v) for s, v in _need(doc, "values").items()}
        return mg.MartingaleTable(int(_need(doc, "depth")), values)
    except (ValueError, AttributeError) as err:
        raise ParseError(str(err)) from None


def parse_strategy(doc: Any) -> mg.BettingStrategy:
    kind = _need(doc, "kind")
    try:
        if kind == "constant":
            return mg.ConstantStrategy(parse_fraction(_need(doc, "c")))
        if kind == "tabulated":
            return mg.TableStrategy(parse_table(_need(doc, "table")))
        if kind == "point-doubler":
            return mg.PointDoubler(parse_point(_need(doc, "point")))
        if kind == "translated":
            return mg.TranslateStrategy(parse_strategy(_need(doc, "base")),
                                        _need(doc, "sigma"))
        if kind == "scaled":
            return mg.ScaledStrategy(parse_strategy(_need(doc, "base")),
                                     parse_fraction(_need(doc, "factor")))
        if kind == "blend":
            return mg.BlendStrategy(
                [(parse_fraction(w), parse_strategy(s)) for w, s in _need(doc, "terms")])
        if kind == "mixture":
            return mg.MixtureStrategy(parse_strategy(_need(doc, "d")),
                                      parse_strategy(_need(doc, "d_e")),
                                      int(_need(doc, "n_e")))
        if kind == "averaged":
            return mg.AverageStrategy(parse_strategy(_need(doc, "base")),
                                      int(_need(doc, "level")))
        if kind == "reset":
            return mg.ResetStrategy(parse_strategy(_need(doc, "base")),
                                    parse_fraction(_need(doc, "q")),
                                    parse_set(_need(doc, "blocks")))
        if kind == "block-doubler":
            return sr.BlockDoubler([int(a) for a in _need(doc, "exponents")],
                                   parse_fraction(_need(doc, "q")))
    except (ValueError, TypeError) as err:
        raise ParseError(str(err)) from None
    raise ParseError(f"unknown strategy kind {kind!r}")


def parse_test(doc: Any) -> TestFamily:
    try:
        levels = {int(n): parse_set(s) for n, s in _need(doc, "levels").items()}
        bounds = doc.get("bounds")
        sched = None if bounds is None else {
            int(n): parse_fraction(v) for n, v in bounds.items()}
        mart = doc.get("martingale")
        return TestFamily(_need(doc, "kind"), levels, bound_schedule=sched,
                          martingale=None if mart is None else parse_strategy(mart))
    except (ValueError, AttributeError) as err:
        raise ParseError(str(err)) from None


def parse_machine(doc: Any) -> Machine:
    try:
        return Machine(_need(doc, "table"))
    except (ValueError, AttributeError) as err:
        raise ParseError(str(err)) from None


def parse_requests(doc: Any) -> KCRequestList:
    try:
        return KCRequestList([(int(k), s) for k, s in _need(doc, "requests")])
    except (ValueError, TypeError) as err:
        raise ParseError(str(err)) from None


def parse_dyadic(doc: Any) -> DyadicFunction:
    try:
        return DyadicFunction([(k, parse_fraction(v)) for k, v in _need(doc, "values")])
    except (ValueError, TypeError) as err:
        raise ParseError(str(err)) from None


def parse_trace(doc: Any) -> DiagonalTrace:
    try:
        stages = tuple(
            TraceStage(
                index=int(_need(s, "index")),
                sigma=_need(s, "sigma"),
                current=parse_set(_need(s, "set")),
                n_e=s.get("n_e"),
                tau=s.get("tau"),
            )
            for s in _need(doc, "stages")
        )
        return DiagonalTrace(_need(doc, "case"), stages)
    except (ValueError, TypeError) as err:
        raise ParseError(str(err)) from None
