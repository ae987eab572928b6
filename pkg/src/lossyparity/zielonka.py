"""Classical recursive solver for deterministic parity games (no random states).

Kept deliberately separate from the stochastic machinery: it has its own
attractor and works on plain Python sets, so it can serve as a reference.
"""

from __future__ import annotations

from .game import GameGraph, Owner


def _attractor(g: GameGraph, player: int, target: set[int], arena: set[int]) -> set[int]:
    attr = set(target) & arena
    changed = True
    while changed:
        changed = False
        for s in arena - attr:
            inside = [t for t in g.succ[s] if t in arena]
            if g.owners[s].player == player:
                ok = any(t in attr for t in inside)
            else:
                ok = all(t in attr for t in inside)
            if ok:
                attr.add(s)
                changed = True
    return attr


def _solve(g: GameGraph, arena: set[int]) -> tuple[set[int], set[int]]:
    if not arena:
        return set(), set()
    d = max(g.colors[s] for s in arena)
    p = d % 2
    top = {s for s in arena if g.colors[s] == d}
    a = _attractor(g, p, top, arena)
    w = list(_solve(g, arena - a))
    if not w[1 - p]:
        w[p] = set(arena)
        w[1 - p] = set()
        return w[0], w[1]
    b = _attractor(g, 1 - p, w[1 - p], arena)
    w2 = list(_solve(g, arena - b))
    w2[1 - p] = w2[1 - p] | b
    return w2[0], w2[1]


def winning_regions(g: GameGraph) -> tuple[frozenset[int], frozenset[int]]:
    if any(o is Owner.RANDOM for o in g.owners):
        raise ValueError("reference solver handles deterministic games only")
    w0, w1 = _solve(g, set(range(len(g))))
    return frozenset(w0), frozenset(w1)
