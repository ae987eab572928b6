"""Positive-probability reachability (force sets), their complements, and strategies."""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .game import GameGraph, MemorylessStrategy, Owner, Region, _mask_of, check_valid, iter_bits


@dataclass(frozen=True)
class _Csr:
    succ_ptr: np.ndarray
    succ_idx: np.ndarray
    pred_ptr: np.ndarray
    pred_idx: np.ndarray
    owner_code: np.ndarray  # 0, 1, or 2 for random


_CSR_CACHE: "weakref.WeakKeyDictionary[GameGraph, _Csr]" = weakref.WeakKeyDictionary()


def csr(g: GameGraph) -> _Csr:
    """Compressed successor/predecessor arrays for the kernels (cached per graph)."""
    got = _CSR_CACHE.get(g)
    if got is not None:
        return got
    def pack(rows):
        ptr = np.zeros(len(rows) + 1, dtype=np.int32)
        ptr[1:] = np.cumsum([len(r) for r in rows]) if rows else []
        flat = [t for r in rows for t in r]
        return ptr, np.asarray(flat, dtype=np.int32)
    sp, si = pack(g.succ)
    pp, pi = pack(g.pred)
    code = {Owner.PLAYER0: 0, Owner.PLAYER1: 1, Owner.RANDOM: 2}
    own = np.asarray([code[o] for o in g.owners], dtype=np.uint8)
    got = _Csr(sp, si, pp, pi, own)
    _CSR_CACHE[g] = got
    return got


def mask_to_flags(mask: int, n: int) -> np.ndarray:
    raw = np.frombuffer(mask.to_bytes((n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()


def flags_to_mask(flags: np.ndarray) -> int:
    return int.from_bytes(np.packbits(flags.astype(np.uint8), bitorder="little").tobytes(), "little")


@dataclass(frozen=True, eq=False)
class ForceCertificate:
    """Layered record of ``Force^player(target)`` inside ``restriction``.

    ``layer_index[s]`` is the first round in which ``s`` entered the set
    (0 for target states) and -1 outside it.  ``layers[i]`` is the
    cumulative region ``R_i``.
    """

    game: GameGraph
    player: int
    target: Region
    restriction: Region
    layer_index: np.ndarray = field(repr=False)

    @cached_property
    def force(self) -> Region:
        return Region(self.game, flags_to_mask(self.layer_index >= 0))

    @cached_property
    def avoid(self) -> Region:
        return self.restriction - self.force

    @property
    def depth(self) -> int:
        """Index of the last layer (``alpha``)."""
        return int(self.layer_index.max(initial=0))

    @cached_property
    def layers(self) -> list[Region]:
        li = self.layer_index
        return [Region(self.game, flags_to_mask((li >= 0) & (li <= i))) for i in range(self.depth + 1)]

    def layer(self, i: int) -> Region:
        return self.layers[min(i, self.depth)]

    def layer_of(self, s: int) -> int:
        return int(self.layer_index[s])


def force_set(g: GameGraph, player: int, target: Region, restriction: Region | None = None) -> ForceCertificate:
    """Everything from which ``player`` reaches ``target`` with positive probability.

    With ``restriction`` the computation runs in the subgame induced by that
    region (which the caller guarantees is closable); edges leaving it are
    ignored.
    """
    if player not in (0, 1):
        raise ValueError(f"player must be 0 or 1, got {player!r}")
    n = len(g)
    r_mask = g.full_mask if restriction is None else _mask_of(g, restriction)
    t_mask = _mask_of(g, target) & r_mask
    c = csr(g)
    exist = (c.owner_code != (1 - player)).astype(np.uint8)
    layers = kernels.force_layers(
        c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx,
        exist, mask_to_flags(t_mask, n), mask_to_flags(r_mask, n),
    )
    return ForceCertificate(g, player, Region(g, t_mask), Region(g, r_mask), layers)


def force_choice(cert: ForceCertificate, s: int) -> int | None:
    """Smallest-id successor of ``s`` in a strictly lower layer, or None."""
    i = cert.layer_of(s)
    if i <= 0:
        return None
    r = cert.restriction.mask
    for t in cert.game.sorted_succ[s]:
        if (r >> t) & 1 and 0 <= cert.layer_of(t) < i:
            return t
    return None


def force_strategy(cert: ForceCertificate) -> MemorylessStrategy:
    g = cert.game
    own = cert.force.mask & ~cert.target.mask & g.owner_mask(Owner.of_player(cert.player))
    choice = {s: force_choice(cert, s) for s in iter_bits(own)}
    return MemorylessStrategy(cert.player, {s: t for s, t in choice.items() if t is not None})


def avoid_choice(cert: ForceCertificate, s: int) -> int | None:
    """Smallest-id successor of ``s`` that stays in the avoid set."""
    a = cert.avoid.mask
    if not (a >> s) & 1:
        return None
    for t in cert.game.sorted_succ[s]:
        if (a >> t) & 1:
            return t
    return None


def avoid_strategy(cert: ForceCertificate) -> MemorylessStrategy:
    g = cert.game
    opp = 1 - cert.player
    own = cert.avoid.mask & g.owner_mask(Owner.of_player(opp))
    choice = {s: avoid_choice(cert, s) for s in iter_bits(own)}
    return MemorylessStrategy(opp, {s: t for s, t in choice.items() if t is not None})


def force(g: GameGraph, player: int, target: Region) -> ForceCertificate:
    """Validated entry point used by the CLI."""
    check_valid(g)
    return force_set(g, player, target)
