"""Game generators: exhaustive small games, seeded random games, and the ladder family."""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .game import GameGraph, Owner

_OWNERS = (Owner.PLAYER0, Owner.PLAYER1, Owner.RANDOM)


def _build(owners, colors, succ, probs=None, names=None) -> GameGraph:
    n = len(owners)
    if probs is None:
        probs = tuple(
            tuple(1.0 / len(succ[s]) for _ in succ[s]) if owners[s] is Owner.RANDOM else None
            for s in range(n)
        )
    return GameGraph(
        names=tuple(names or (f"s{i}" for i in range(n))),
        owners=tuple(owners),
        colors=tuple(colors),
        succ=tuple(tuple(r) for r in succ),
        probs=tuple(probs),
        rank=max(colors, default=0),
    )


def exhaustive(max_states: int = 3, max_color: int = 2, max_outdegree: int = 2) -> Iterator[GameGraph]:
    """Every game up to the bounds; successor lists are sorted, random states uniform."""
    for n in range(1, max_states + 1):
        targets = [
            combo
            for d in range(1, min(max_outdegree, n) + 1)
            for combo in itertools.combinations(range(n), d)
        ]
        per_state = list(itertools.product(_OWNERS, range(max_color + 1), targets))
        for states in itertools.product(per_state, repeat=n):
            owners = [o for o, _, _ in states]
            colors = [c for _, c, _ in states]
            succ = [t for _, _, t in states]
            yield _build(owners, colors, succ)


def exhaustive_count(max_states: int = 3, max_color: int = 2, max_outdegree: int = 2) -> int:
    total = 0
    for n in range(1, max_states + 1):
        t = sum(len(list(itertools.combinations(range(n), d))) for d in range(1, min(max_outdegree, n) + 1))
        total += (3 * (max_color + 1) * t) ** n
    return total


def random_game(
    rng: np.random.Generator,
    max_states: int = 6,
    max_color_value: int = 3,
    max_distinct_colors: int = 3,
    max_outdegree: int = 3,
    min_random: int = 1,
    allow_random: bool = True,
) -> GameGraph:
    """One random valid game.

    Colors come from a random palette of at most ``max_distinct_colors``
    values in ``0..max_color_value``.  Random rows get random positive weights.
    """
    n = int(rng.integers(max(1, min_random), max_states + 1))
    k = int(rng.integers(1, max_distinct_colors + 1))
    palette = sorted(rng.choice(max_color_value + 1, size=min(k, max_color_value + 1), replace=False).tolist())
    colors = [int(rng.choice(palette)) for _ in range(n)]
    if allow_random:
        owners = [_OWNERS[int(rng.integers(3))] for _ in range(n)]
        have = sum(o is Owner.RANDOM for o in owners)
        if have < min_random:
            for s in rng.permutation(n)[: min_random - have].tolist():
                owners[s] = Owner.RANDOM
    else:
        owners = [_OWNERS[int(rng.integers(2))] for _ in range(n)]
    succ, probs = [], []
    for s in range(n):
        d = int(rng.integers(1, min(max_outdegree, n) + 1))
        row = sorted(rng.choice(n, size=d, replace=False).tolist())
        succ.append(row)
        if owners[s] is Owner.RANDOM:
            w = rng.uniform(0.1, 1.0, size=d)
            p = (w / w.sum()).tolist()
            p[-1] = 1.0 - sum(p[:-1])
            probs.append(tuple(p))
        else:
            probs.append(None)
    return _build(owners, colors, succ, probs)


def random_corpus(count: int, seed: int, **kwargs) -> list[GameGraph]:
    rng = np.random.default_rng(seed)
    return [random_game(rng, **kwargs) for _ in range(count)]


def ladder(n: int) -> GameGraph:
    """Truncated ladder: ``s0`` (player 1) picks any rung; rung 1 is an absorbing color-2
    random state, rung ``k >= 2`` (color 1) steps down or back to ``s0`` with probability 1/2 each.
    """
    if n < 1:
        raise ValueError("ladder needs at least one rung")
    owners = [Owner.PLAYER1] + [Owner.RANDOM] * n
    colors = [0, 2] + [1] * (n - 1)
    succ = [list(range(1, n + 1)), [1]]
    for k in range(2, n + 1):
        succ.append(sorted({k - 1, 0}))
    return _build(owners, colors, succ, names=[f"s{i}" for i in range(n + 1)])
