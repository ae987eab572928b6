"""Brute-force qualitative classification, independent of the recursive solver.

With both players' memoryless strategies fixed, a finite game becomes a
Markov chain.  A run almost surely ends up in a bottom SCC and then sees
all of its colors infinitely often, so the parity outcome from a state is
read off the bottom SCCs reachable from it.  :func:`classify` enumerates
every memoryless strategy of both players.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .game import GameGraph, MemorylessStrategy, Owner, Region, check_valid

DEFAULT_ENUMERATION_CAP = 10**7

ALMOST_SURE = "almost-sure"
POSITIVE = "positive-not-sure"
ZERO = "zero"


class EnumerationCap(RuntimeError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"enumeration-cap: {size} strategy profiles exceed cap {cap}")
        self.size = size
        self.cap = cap


class PartialStrategy(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QualitativeVerdict:
    """Per-state outcome of each player's parity objective."""

    game: GameGraph
    almost_sure: tuple[int, int]  # bitmask per player
    positive: tuple[int, int]

    def of(self, player: int, s: int) -> str:
        if (self.almost_sure[player] >> s) & 1:
            return ALMOST_SURE
        if (self.positive[player] >> s) & 1:
            return POSITIVE
        return ZERO

    def as_region(self, player: int) -> Region:
        return Region(self.game, self.almost_sure[player])

    def pos_region(self, player: int) -> Region:
        return Region(self.game, self.positive[player])

    def partition(self) -> tuple[Region, Region, Region]:
        """(a.s. player 0, a.s. player 1, positive for both and a.s. for neither)."""
        g = self.game
        a0, a1 = self.almost_sure
        both = self.positive[0] & self.positive[1] & ~a0 & ~a1 & g.full_mask
        return Region(g, a0), Region(g, a1), Region(g, both)

    def is_determined(self) -> bool:
        a0, a1, both = self.partition()
        return (a0.mask | a1.mask | both.mask) == self.game.full_mask and not (a0.mask & a1.mask)


def _arrays(g: GameGraph):
    ptr = np.zeros(len(g) + 1, dtype=np.int32)
    ptr[1:] = np.cumsum([len(r) for r in g.succ])
    idx = np.asarray([t for r in g.succ for t in r], dtype=np.int32)
    code = {Owner.PLAYER0: 0, Owner.PLAYER1: 1, Owner.RANDOM: 2}
    owner = np.asarray([code[o] for o in g.owners], dtype=np.uint8)
    colors = np.asarray(g.colors, dtype=np.int32)
    return ptr, idx, owner, colors


def _mask(flags) -> int:
    m = 0
    for s, f in enumerate(flags.tolist()):
        if f:
            m |= 1 << s
    return m


def classify_fixed(
    g: GameGraph,
    strat0: MemorylessStrategy | Mapping[int, int],
    strat1: MemorylessStrategy | Mapping[int, int],
    fill: bool = False,
) -> QualitativeVerdict:
    """Classify every state in the Markov chain induced by two memoryless strategies.

    Unless ``fill`` is set, both strategies must be total on their owners'
    states; with ``fill`` missing choices default to the smallest-id successor.
    """
    rows = []
    for s, o in enumerate(g.owners):
        if o is Owner.RANDOM:
            rows.append(g.succ[s])
            continue
        strat = strat0 if o is Owner.PLAYER0 else strat1
        choice = strat.choice if isinstance(strat, MemorylessStrategy) else strat
        t = choice.get(s)
        if t is None:
            if not fill:
                raise PartialStrategy(f"partial strategy: no choice at state {g.names[s]!r}")
            t = min(g.succ[s])
        if t not in g.succ[s]:
            raise PartialStrategy(f"choice {t} at state {g.names[s]!r} is not a successor")
        rows.append((t,))
    ptr = np.zeros(len(g) + 1, dtype=np.int32)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    idx = np.asarray([t for r in rows for t in r], dtype=np.int32)
    flags = kernels.bscc_flags(ptr, idx, np.asarray(g.colors, dtype=np.int32)).tolist()
    as0 = pos0 = as1 = pos1 = 0
    for s, f in enumerate(flags):
        bit = 1 << s
        if f == 1:
            as0 |= bit
        if f == 2:
            as1 |= bit
        if f & 1:
            pos0 |= bit
        if f & 2:
            pos1 |= bit
    return QualitativeVerdict(g, (as0, as1), (pos0, pos1))


def profile_count(g: GameGraph) -> int:
    n = 1
    for s, o in enumerate(g.owners):
        if o is not Owner.RANDOM:
            n *= len(g.succ[s])
    return n


def classify(g: GameGraph, cap: int = DEFAULT_ENUMERATION_CAP, validate: bool = True) -> QualitativeVerdict:
    """Exact qualitative verdict by exhausting memoryless strategy profiles."""
    if validate:
        check_valid(g)
    size = profile_count(g)
    if size > cap:
        raise EnumerationCap(size, cap)
    ptr, idx, owner, colors = _arrays(g)
    as0, pos0, as1, pos1 = kernels.classify_profiles(ptr, idx, owner, colors)
    return QualitativeVerdict(g, (_mask(as0), _mask(as1)), (_mask(pos0), _mask(pos1)))


@dataclass(frozen=True)
class FiniteMemoryStrategy:
    """Strategy with memory: ``next(s, m)`` picks the move, ``update(s, m)`` the new memory.

    Both maps are consulted at the owner's states only; ``update`` is also
    applied at other states when ``update_everywhere`` is set.
    """

    player: int
    initial: object
    next: Callable[[int, object], int]
    update: Callable[[int, object], object]
    update_everywhere: bool = True

    @classmethod
    def from_memoryless(cls, strat: MemorylessStrategy, default: Callable[[int], int]) -> "FiniteMemoryStrategy":
        return cls(
            player=strat.player,
            initial=0,
            next=lambda s, m: strat.choice.get(s, default(s)),
            update=lambda s, m: m,
        )

    @classmethod
    def from_tables(cls, player: int, initial, next_table: Mapping, update_table: Mapping) -> "FiniteMemoryStrategy":
        return cls(
            player=player,
            initial=initial,
            next=lambda s, m: next_table[(s, m)],
            update=lambda s, m: update_table.get((s, m), m),
        )
