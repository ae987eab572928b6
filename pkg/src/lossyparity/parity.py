"""Almost-sure and positive-probability parity winning regions on explicit games."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .game import GameGraph, MemorylessStrategy, Owner, Region, check_valid, iter_bits
from .reach import ForceCertificate, force_choice, force_set
from .scheme import AS, PP, CNode, DNode, Node, Solver, run_both, run_c, run_d


class ExplicitArena:
    """Scheme arena over one explicit game; regions are :class:`Region` values."""

    def __init__(self, g: GameGraph):
        self.g = g
        self._empty = Region(g, 0)
        self._full = Region(g, g.full_mask)
        self._owner = tuple(o.player for o in g.owners)
        present = {}
        for s, c in enumerate(g.colors):
            present[c] = present.get(c, 0) | (1 << s)
        self._by_color = sorted(present.items(), reverse=True)
        self.force_calls = 0

    def empty(self):
        return self._empty

    def full(self):
        return self._full

    def union(self, a, b):
        return a | b

    def inter(self, a, b):
        return a & b

    def diff(self, a, b):
        return a - b

    def is_empty(self, a):
        return not a.mask

    def equals(self, a, b):
        return a.mask == b.mask

    def key(self, a):
        return a.mask

    def max_color(self, r):
        for c, m in self._by_color:
            if m & r.mask:
                return c
        return None

    def color_set(self, c, r):
        for col, m in self._by_color:
            if col == c:
                return Region(self.g, m & r.mask)
        return self._empty

    def force(self, player, target, r):
        self.force_calls += 1
        return force_set(self.g, player, target, r)

    def force_choice(self, cert, s):
        return force_choice(cert, s)

    def member(self, r, s):
        return bool((r.mask >> s) & 1)

    def owner(self, s):
        return self._owner[s]

    def color(self, s):
        return self.g.colors[s]

    def successors(self, s):
        return self.g.sorted_succ[s]


@dataclass(frozen=True, eq=False)
class ParityCertificate:
    """Recursion tree of a solve; ``root_c`` and ``root_d`` are the top nodes."""

    game: GameGraph
    declared_rank: int
    rank: int
    root_c: Node
    root_d: Node

    def nodes(self) -> list[Node]:
        seen: dict[int, Node] = {}
        stack = [self.root_d, self.root_c]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen[id(node)] = node
            stack.extend(node.children())
        return list(seen.values())

    def to_json(self) -> dict:
        return node_to_json(self.root_d, self.game)


@dataclass(frozen=True, eq=False)
class ParityPartition:
    game: GameGraph
    rank: int
    as_winner0: Region
    as_winner1: Region
    both_wpp: Region
    strategies: dict[str, MemorylessStrategy] = field(repr=False)
    certificate: ParityCertificate = field(repr=False)

    @property
    def favored(self) -> int:
        return self.rank % 2

    def as_winner(self, player: int) -> Region:
        return self.as_winner0 if player == 0 else self.as_winner1

    @property
    def c_region(self) -> Region:
        return self.as_winner(self.favored)

    @property
    def d_region(self) -> Region:
        return ~self.as_winner(1 - self.favored)

    def to_json(self) -> dict:
        g = self.game
        return {
            "rank": self.rank,
            "favored_player": self.favored,
            "as_winner0": self.as_winner0.names(),
            "as_winner1": self.as_winner1.names(),
            "both_wpp": self.both_wpp.names(),
            "strategies": {k: v.to_names(g) for k, v in sorted(self.strategies.items())},
        }


def _materialize(g: GameGraph, node: Node, player: int, kind: str, region: Region) -> MemorylessStrategy:
    choice = {}
    for s in iter_bits(region.mask & g.owner_mask(Owner.of_player(player))):
        t = node.choose(player, kind, s)
        if t is not None:
            choice[s] = t
    return MemorylessStrategy(player, choice)


def cn(g: GameGraph, n: int) -> tuple[Region, Node]:
    """Almost-sure winning region of player ``n % 2`` in a game of rank at most ``n``."""
    check_valid(g)
    node = run_c(Solver(ExplicitArena(g)), n)
    return node.region(n % 2, AS), node


def dn(g: GameGraph, n: int) -> tuple[Region, Node]:
    """Positive-probability winning region of player ``n % 2``."""
    check_valid(g)
    node = run_d(Solver(ExplicitArena(g)), n)
    return node.region(n % 2, PP), node


def solve(g: GameGraph, validate: bool = True) -> ParityPartition:
    if validate:
        check_valid(g)
    n = g.max_color
    x = n % 2
    solver = Solver(ExplicitArena(g))
    c, d = run_both(solver, n)
    c_reg = c.region(x, AS)
    d_reg = d.region(x, PP)
    full = Region(g, g.full_mask)
    as_x, as_opp = c_reg, full - d_reg
    strategies = {
        "fc_x": _materialize(g, c, x, AS, c_reg),
        "fc_opp": _materialize(g, c, 1 - x, PP, full - c_reg),
        "fd_x": _materialize(g, d, x, PP, d_reg),
        "fd_opp": _materialize(g, d, 1 - x, AS, as_opp),
    }
    cert = ParityCertificate(g, g.rank, n, c, d)
    return ParityPartition(
        game=g,
        rank=n,
        as_winner0=as_x if x == 0 else as_opp,
        as_winner1=as_opp if x == 0 else as_x,
        both_wpp=d_reg - c_reg,
        strategies=strategies,
        certificate=cert,
    )


# -- certificate serialization ------------------------------------------------


def _force_json(cert: ForceCertificate) -> dict:
    g = cert.game
    return {
        "player": cert.player,
        "target": cert.target.names(),
        "layers": {g.names[s]: cert.layer_of(s) for s in iter_bits(cert.force.mask)},
    }


def node_to_json(node: Node, g: GameGraph) -> dict:
    out: dict[str, Any] = {"kind": node.kind, "rank": node.rank, "restriction": node.restriction.names()}
    if isinstance(node, CNode):
        out["X"] = [_force_json(c) for c in node.X]
        out["Z"] = [_force_json(c) for c in node.Z]
        out["Y"] = [y.names() for y in node.Y]
        out["C"] = node.C.names()
    elif isinstance(node, DNode):
        out["U"] = [_force_json(c) for c in node.U]
        out["V"] = [v.names() for v in node.V]
        out["D"] = node.D.names()
    if node.children():
        out["children"] = [node_to_json(ch, g) for ch in node.children()]
    return out
