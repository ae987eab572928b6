"""The C/D recursion, shared by the explicit and the symbolic solvers.

Everything here talks to an *arena*: an object supplying region algebra,
colors, a force operator, and per-state strategy queries.  Regions are
opaque to this module.  Subgames are never materialized; every node works
inside a restriction region of the root arena.

A C-node of rank ``n`` (favored player ``x = n % 2``) exposes the region
where ``x`` wins almost surely and, on the rest of its restriction, the
region where ``1 - x`` wins with positive probability.  A D-node exposes
``x``'s positive-probability region and ``1 - x``'s almost-sure region.
Sub-calls always use the largest color present in the sub-restriction, so
the node type is chosen to deliver the pair of regions the caller needs.
"""

from __future__ import annotations

from typing import Any, Protocol

AS = "as"
PP = "pp"


class Arena(Protocol):
    def empty(self) -> Any: ...
    def full(self) -> Any: ...
    def union(self, a, b) -> Any: ...
    def inter(self, a, b) -> Any: ...
    def diff(self, a, b) -> Any: ...
    def is_empty(self, a) -> bool: ...
    def equals(self, a, b) -> bool: ...
    def key(self, a) -> Any: ...
    def max_color(self, r) -> int | None: ...
    def color_set(self, c: int, r) -> Any: ...
    def force(self, player: int, target, r) -> Any: ...
    def force_choice(self, cert, s) -> Any: ...
    def member(self, r, s) -> bool: ...
    def owner(self, s) -> int | None: ...
    def color(self, s) -> int: ...
    def successors(self, s) -> list: ...


class RankMismatch(ValueError):
    def __init__(self, declared: int, found: int):
        super().__init__(f"rank-mismatch: color {found} exceeds declared rank {declared}")
        self.declared = declared
        self.found = found


class Solver:
    """Builds and memoizes nodes over one arena."""

    def __init__(self, arena: Arena, iteration_cap: int | None = None):
        self.arena = arena
        self.iteration_cap = iteration_cap
        self._memo: dict[tuple, "Node"] = {}

    def sub_node(self, restriction, p: int) -> "Node":
        """Node over ``restriction`` that answers ``(p, AS)`` and ``(1 - p, PP)``."""
        a = self.arena
        if a.is_empty(restriction):
            return EmptyNode(self, restriction)
        k = a.max_color(restriction)
        if k == 0:
            kind, k = "base", 0
        elif k % 2 == p:
            kind = "C"
        else:
            kind = "D"
        memo_key = (kind, k, a.key(restriction))
        node = self._memo.get(memo_key)
        if node is None:
            cls = {"base": BaseNode, "C": CNode, "D": DNode}[kind]
            node = cls(self, restriction, k) if kind != "base" else BaseNode(self, restriction)
            self._memo[memo_key] = node
        return node

    def c_node(self, restriction, n: int) -> "Node":
        if n == 0:
            return BaseNode(self, restriction)
        return CNode(self, restriction, n)

    def d_node(self, restriction, n: int) -> "Node":
        if n == 0:
            return BaseNode(self, restriction)
        return DNode(self, restriction, n)

    def check_cap(self, i: int, what: str) -> None:
        if self.iteration_cap is not None and i >= self.iteration_cap:
            raise TerminationCap(what, i)


class TerminationCap(RuntimeError):
    def __init__(self, what: str, iterations: int):
        super().__init__(f"termination-cap: {what} did not stabilize within {iterations} iterations")
        self.iterations = iterations


class Node:
    kind = "?"
    rank = 0

    def __init__(self, solver: Solver, restriction):
        self.solver = solver
        self.restriction = restriction

    @property
    def favored(self) -> int:
        return self.rank % 2

    def region(self, player: int, kind: str):
        raise NotImplementedError

    def choose(self, player: int, kind: str, s):
        raise NotImplementedError

    def children(self) -> list["Node"]:
        return []

    def iterations(self) -> int:
        return 0


class EmptyNode(Node):
    kind = "empty"

    def region(self, player, kind):
        return self.solver.arena.empty()

    def choose(self, player, kind, s):
        return None


class BaseNode(Node):
    """Every color is 0: player 0 wins surely by staying anywhere inside."""

    kind = "base"

    def __init__(self, solver, restriction, rank: int = 0):
        super().__init__(solver, restriction)

    def region(self, player, kind):
        return self.restriction if player == 0 else self.solver.arena.empty()

    def choose(self, player, kind, s):
        a = self.solver.arena
        if player != 0 or a.owner(s) != 0 or not a.member(self.restriction, s):
            return None
        return _first_inside(a, s, self.restriction)


def _first_inside(a: Arena, s, region):
    for t in a.successors(s):
        if a.member(region, t):
            return t
    return None


def _least_index(a: Arena, regions: list, s) -> int | None:
    for i, r in enumerate(regions):
        if a.member(r, s):
            return i
    return None


class CNode(Node):
    """Almost-sure region of ``x`` and the opponent's positive-probability complement."""

    kind = "C"

    def __init__(self, solver: Solver, restriction, rank: int):
        super().__init__(solver, restriction)
        self.rank = rank
        a = solver.arena
        x = rank % 2
        self.X: list = []
        self.Z: list = []
        self.Y: list = []
        self.subs: list[Node] = []
        acc = a.empty()
        i = 0
        while True:
            solver.check_cap(i, f"C{rank} sequence")
            xc = a.force(1 - x, acc, restriction)
            g1 = a.diff(restriction, xc.force)
            zc = a.force(x, a.color_set(rank, g1), g1)
            g2 = a.diff(g1, zc.force)
            sub = solver.sub_node(g2, x)
            y = a.union(xc.force, sub.region(1 - x, PP))
            self.X.append(xc)
            self.Z.append(zc)
            self.Y.append(y)
            self.subs.append(sub)
            if a.equals(y, xc.force):
                break
            acc = a.union(acc, y)
            i += 1
        self.alpha = i
        self.C = a.diff(restriction, self.X[-1].force)
        self._complement = self.X[-1].force

    def iterations(self) -> int:
        return self.alpha + 1

    def children(self):
        return self.subs

    def region(self, player, kind):
        x = self.favored
        if (player, kind) == (x, AS):
            return self.C
        if (player, kind) == (1 - x, PP):
            return self._complement
        raise KeyError(f"C-node does not provide ({player}, {kind})")

    def choose(self, player, kind, s):
        a = self.solver.arena
        x = self.favored
        if a.owner(s) != player:
            return None
        if (player, kind) == (x, AS):
            if not a.member(self.C, s):
                return None
            zc = self.Z[-1]
            if not a.member(zc.force, s):
                return self.subs[-1].choose(x, AS, s)
            if a.color(s) != self.rank:
                return a.force_choice(zc, s)
            return _first_inside(a, s, self.C)
        if (player, kind) == (1 - x, PP):
            b = _least_index(a, self.Y, s)
            if b is None:
                return None
            xc = self.X[b]
            if a.member(xc.force, s):
                return a.force_choice(xc, s)
            return self.subs[b].choose(1 - x, PP, s)
        raise KeyError(f"C-node does not provide ({player}, {kind})")


class DNode(Node):
    """Positive-probability region of ``x`` and the opponent's almost-sure complement."""

    kind = "D"

    def __init__(self, solver: Solver, restriction, rank: int, first_sub: Node | None = None):
        super().__init__(solver, restriction)
        self.rank = rank
        a = solver.arena
        x = rank % 2
        self.U: list = []
        self.V: list = []
        self.subs: list[Node] = []
        acc = a.empty()
        i = 0
        while True:
            solver.check_cap(i, f"D{rank} sequence")
            uc = a.force(x, acc, restriction)
            rest = a.diff(restriction, uc.force)
            if i == 0 and first_sub is not None:
                sub = first_sub
            else:
                sub = solver.sub_node(rest, x)
            v = a.union(uc.force, sub.region(x, AS))
            self.U.append(uc)
            self.V.append(v)
            self.subs.append(sub)
            if a.equals(v, uc.force):
                break
            acc = a.union(acc, v)
            i += 1
        self.alpha = i
        self.D = self.U[-1].force
        self._complement = a.diff(restriction, self.D)

    def iterations(self) -> int:
        return self.alpha + 1

    def children(self):
        return self.subs

    def region(self, player, kind):
        x = self.favored
        if (player, kind) == (x, PP):
            return self.D
        if (player, kind) == (1 - x, AS):
            return self._complement
        raise KeyError(f"D-node does not provide ({player}, {kind})")

    def choose(self, player, kind, s):
        a = self.solver.arena
        x = self.favored
        if a.owner(s) != player:
            return None
        if (player, kind) == (x, PP):
            b = _least_index(a, self.V, s)
            if b is None:
                return None
            uc = self.U[b]
            if a.member(uc.force, s):
                return a.force_choice(uc, s)
            return self.subs[b].choose(x, AS, s)
        if (player, kind) == (1 - x, AS):
            if not a.member(self._complement, s):
                return None
            return self.subs[-1].choose(1 - x, PP, s)
        raise KeyError(f"D-node does not provide ({player}, {kind})")


def check_rank(arena: Arena, n: int) -> None:
    if n < 0:
        raise ValueError("rank must be non-negative")
    k = arena.max_color(arena.full())
    if k is not None and k > n:
        raise RankMismatch(n, k)


def run_c(solver: Solver, n: int) -> Node:
    check_rank(solver.arena, n)
    return solver.c_node(solver.arena.full(), n)


def run_d(solver: Solver, n: int) -> Node:
    check_rank(solver.arena, n)
    return solver.d_node(solver.arena.full(), n)


def run_both(solver: Solver, n: int) -> tuple[Node, Node]:
    """C and D nodes of rank ``n`` over the whole arena, sharing the first sub-call."""
    check_rank(solver.arena, n)
    full = solver.arena.full()
    if n == 0:
        base = BaseNode(solver, full)
        return base, base
    c = solver.c_node(full, n)
    d = DNode(solver, full, n, first_sub=c)
    return c, d
