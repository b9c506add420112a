"""cantorlab: exact-rational constructions on Cantor space.

Finite prefix-free generator sets stand in for c.e. open sets, eventually
periodic points for the sequences they cover, and exact rational martingales
for the betting side; every construction certifies its measure bounds as
exact inequalities.
"""

from .space import (
    PeriodicPoint,
    PrefixFreeSet,
    StagedOpenSet,
    condition,
    covers,
    measure,
    member,
    power,
    reduce,
    tails,
    union,
)

__all__ = [
    "PeriodicPoint",
    "PrefixFreeSet",
    "StagedOpenSet",
    "condition",
    "covers",
    "measure",
    "member",
    "power",
    "reduce",
    "tails",
    "union",
]

__version__ = "0.1.0"
