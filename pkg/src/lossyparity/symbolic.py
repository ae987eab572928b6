"""Force sets and parity winning regions of lossy channel games, as regular sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import automata as fa
from .lcs import ConcreteConfig, LcsSystem, config_owner, format_lcs, parse_lcs, player_successors
from .regions import (
    SymbolicRegion,
    SymbolicUniverse,
    is_closable,
    pre_exists_sym,
    pre_forall_sym,
)
from .scheme import AS, PP, BaseNode, CNode, DNode, EmptyNode, Node, Solver, TerminationCap, run_both, run_c, run_d

DEFAULT_ITER_CAP = 10_000


class NotWinningHere(ValueError):
    pass


class WrongPhase(ValueError):
    pass


class NotClosable(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SymForceCertificate:
    player: int
    target: SymbolicRegion
    restriction: SymbolicRegion
    layers: tuple[SymbolicRegion, ...]

    @property
    def force(self) -> SymbolicRegion:
        return self.layers[-1]

    @property
    def avoid(self) -> SymbolicRegion:
        return self.restriction - self.force

    @property
    def iterations(self) -> int:
        return len(self.layers) - 1

    def layer(self, i: int) -> SymbolicRegion:
        return self.layers[min(i, len(self.layers) - 1)]

    def layer_of(self, cfg: ConcreteConfig) -> int:
        for i, r in enumerate(self.layers):
            if r.member(cfg):
                return i
        return -1


def _owned_by(sys: LcsSystem, x: int):
    """Slots where one good successor suffices for ``x``: x's phase-1 slots and all random ones."""
    return lambda slot: slot[1] == 0 or sys.owners[slot[0]] == x


def force_step(r: SymbolicRegion, player: int, restriction: SymbolicRegion) -> SymbolicRegion:
    """One application of the layer equation."""
    sys = r.universe.sys
    mine = _owned_by(sys, player)
    ex = pre_exists_sym(r, restriction).only_slots(mine)
    al = pre_forall_sym(r, restriction).only_slots(lambda s: not mine(s))
    return r | ex | al


def sym_force(
    sys_or_universe,
    player: int,
    target: SymbolicRegion,
    restriction: SymbolicRegion | None = None,
    iteration_cap: int = DEFAULT_ITER_CAP,
    check: bool = True,
) -> SymForceCertificate:
    """Iterate the layer equation until two consecutive layers are equal."""
    u = target.universe
    g = u.full() if restriction is None else restriction
    if check and restriction is not None and not is_closable(g):
        raise NotClosable("not-closable: restriction is not a closable region")
    layers = [target & g]
    while True:
        if len(layers) > iteration_cap:
            raise TerminationCap("force sequence", iteration_cap)
        nxt = force_step(layers[-1], player, g)
        if nxt.equals(layers[-1]):
            break
        layers.append(nxt)
    return SymForceCertificate(player, layers[0], g, tuple(layers))


class SymbolicArena:
    """Scheme arena over one lossy channel system; states are concrete configurations."""

    def __init__(self, universe: SymbolicUniverse, iteration_cap: int = DEFAULT_ITER_CAP):
        self.u = universe
        self.sys = universe.sys
        self.iteration_cap = iteration_cap
        self.force_calls = 0
        self.force_iterations: list[int] = []

    def empty(self):
        return self.u.empty()

    def full(self):
        return self.u.full()

    def union(self, a, b):
        return a | b

    def inter(self, a, b):
        return a & b

    def diff(self, a, b):
        return a - b

    def is_empty(self, a):
        return a.is_empty()

    def equals(self, a, b):
        return a.equals(b)

    def key(self, a):
        return a.key

    def max_color(self, r):
        present = {self.sys.colors[c] for c, _ in r.slots}
        return max(present) if present else None

    def color_set(self, c, r):
        return r.only_slots(lambda slot: self.sys.colors[slot[0]] == c)

    def force(self, player, target, r):
        self.force_calls += 1
        cert = sym_force(self.u, player, target, r, self.iteration_cap, check=False)
        self.force_iterations.append(cert.iterations)
        return cert

    def force_choice(self, cert, s):
        i = cert.layer_of(s)
        if i <= 0:
            return None
        for t in self.successors(s):
            if cert.restriction.member(t) and 0 <= cert.layer_of(t) < i:
                return t
        return None

    def member(self, r, s):
        return r.member(s)

    def owner(self, s):
        return config_owner(self.sys, s)

    def color(self, s):
        return self.sys.colors[s.ctrl]

    def successors(self, s):
        if s.phase != 1:
            return []
        return [c for _, c in player_successors(self.sys, s)]


@dataclass(eq=False)
class SymParityResult:
    system: LcsSystem
    universe: SymbolicUniverse
    rank: int
    as_winner0: SymbolicRegion
    as_winner1: SymbolicRegion
    both_wpp: SymbolicRegion
    root_c: Node
    root_d: Node
    arena: SymbolicArena
    metrics: dict = field(default_factory=dict)

    @property
    def favored(self) -> int:
        return self.rank % 2

    def as_winner(self, player: int) -> SymbolicRegion:
        return self.as_winner0 if player == 0 else self.as_winner1

    def region(self, name: str) -> SymbolicRegion:
        if name not in ("as_winner0", "as_winner1", "both_wpp"):
            raise KeyError(f"unknown region {name!r}")
        return getattr(self, name)


def _partition(sys, u, rank, c, d, arena) -> SymParityResult:
    x = rank % 2
    c_reg = c.region(x, AS)
    d_reg = d.region(x, PP)
    as_opp = u.full() - d_reg
    return SymParityResult(
        system=sys,
        universe=u,
        rank=rank,
        as_winner0=c_reg if x == 0 else as_opp,
        as_winner1=as_opp if x == 0 else c_reg,
        both_wpp=d_reg - c_reg,
        root_c=c,
        root_d=d,
        arena=arena,
    )


def sym_cn(sys: LcsSystem, n: int, iteration_cap: int = DEFAULT_ITER_CAP, state_cap: int = fa.DEFAULT_STATE_CAP):
    u = SymbolicUniverse(sys, state_cap)
    node = run_c(Solver(SymbolicArena(u, iteration_cap), iteration_cap), n)
    return node.region(n % 2, AS), node


def sym_dn(sys: LcsSystem, n: int, iteration_cap: int = DEFAULT_ITER_CAP, state_cap: int = fa.DEFAULT_STATE_CAP):
    u = SymbolicUniverse(sys, state_cap)
    node = run_d(Solver(SymbolicArena(u, iteration_cap), iteration_cap), n)
    return node.region(n % 2, PP), node


def sym_solve(sys: LcsSystem, iteration_cap: int = DEFAULT_ITER_CAP, state_cap: int = fa.DEFAULT_STATE_CAP) -> SymParityResult:
    u = SymbolicUniverse(sys, state_cap)
    arena = SymbolicArena(u, iteration_cap)
    solver = Solver(arena, iteration_cap)
    n = max(sys.colors)
    c, d = run_both(solver, n)
    res = _partition(sys, u, n, c, d, arena)
    res.metrics = solve_metrics(res)
    return res


def solve_metrics(res: SymParityResult) -> dict:
    nodes = all_nodes(res.root_c, res.root_d)
    sizes = {}
    for name in ("as_winner0", "as_winner1", "both_wpp"):
        sizes[name] = sum(res.region(name).dfa_sizes().values())
    return {
        "force_calls": res.arena.force_calls,
        "force_iterations_max": max(res.arena.force_iterations, default=0),
        "force_iterations_total": sum(res.arena.force_iterations),
        "nodes": len(nodes),
        "sequence_iterations_max": max((n.iterations() for n in nodes), default=0),
        "dfa_states": sizes,
    }


def all_nodes(*roots: Node) -> list[Node]:
    seen: dict[int, Node] = {}
    order = []
    stack = list(reversed(roots))
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        order.append(node)
        stack.extend(reversed(node.children()))
    return order


def strategy_step(res: SymParityResult, cfg: ConcreteConfig) -> ConcreteConfig:
    """Move prescribed at ``cfg`` by the winning strategy of its owner."""
    if cfg.phase != 1:
        raise WrongPhase("wrong-phase: strategies act at phase-1 configurations")
    p = res.system.owners[cfg.ctrl]
    x = res.favored
    if res.as_winner(p).member(cfg):
        t = res.root_c.choose(x, AS, cfg) if p == x else res.root_d.choose(1 - x, AS, cfg)
    elif res.both_wpp.member(cfg):
        t = res.root_d.choose(x, PP, cfg) if p == x else res.root_c.choose(1 - x, PP, cfg)
    else:
        raise NotWinningHere(f"not-winning-here: player {p} wins neither almost surely nor positively here")
    if t is None:
        raise NotWinningHere("not-winning-here: certificate prescribes no move at this configuration")
    return t


# -- result bundles ---------------------------------------------------------------------


class _Table:
    def __init__(self):
        self.ids: dict[tuple, int] = {}
        self.items: list[dict] = []

    def ref(self, r: SymbolicRegion) -> int:
        i = self.ids.get(r.key)
        if i is None:
            i = len(self.items)
            self.ids[r.key] = i
            self.items.append(r.to_json())
        return i


def _dump_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")


def certificate_json(res: SymParityResult) -> dict:
    table = _Table()
    node_ids: dict[int, int] = {}
    nodes: list[dict] = []

    def force(c: SymForceCertificate) -> dict:
        return {
            "player": c.player,
            "restriction": table.ref(c.restriction),
            "layers": [table.ref(r) for r in c.layers],
        }

    def visit(node: Node) -> int:
        if id(node) in node_ids:
            return node_ids[id(node)]
        children = [visit(ch) for ch in node.children()]
        out: dict[str, Any] = {"kind": node.kind, "rank": node.rank, "restriction": table.ref(node.restriction)}
        if isinstance(node, CNode):
            out.update(X=[force(c) for c in node.X], Z=[force(c) for c in node.Z],
                       Y=[table.ref(y) for y in node.Y], region=table.ref(node.C))
        elif isinstance(node, DNode):
            out.update(U=[force(c) for c in node.U], V=[table.ref(v) for v in node.V],
                       region=table.ref(node.D))
        out["children"] = children
        node_ids[id(node)] = len(nodes)
        nodes.append(out)
        return node_ids[id(node)]

    root_c = visit(res.root_c)
    root_d = visit(res.root_d)
    return {"rank": res.rank, "root_c": root_c, "root_d": root_d, "nodes": nodes, "regions": table.items}


def write_bundle(res: SymParityResult, out_dir: str | Path, metadata: dict | None = None) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in ("as_winner0", "as_winner1", "both_wpp"):
        _dump_json(out / f"{name}.json", res.region(name).to_json())
        written.append(f"{name}.json")
    _dump_json(out / "certificate.json", certificate_json(res))
    written.append("certificate.json")
    meta = {"rank": res.rank, "favored_player": res.favored, "metrics": res.metrics}
    if metadata:
        meta.update(metadata)
    _dump_json(out / "metadata.json", meta)
    written.append("metadata.json")
    (out / "system.lcs").write_text(format_lcs(res.system))
    written.append("system.lcs")
    return written


def _node_from_json(solver: Solver, data: dict, regions: list, built: dict, nodes: list) -> Node:

    def force(fj: dict) -> SymForceCertificate:
        layers = tuple(regions[i] for i in fj["layers"])
        return SymForceCertificate(fj["player"], layers[0], regions[fj["restriction"]], layers)

    def build(i: int) -> Node:
        if i in built:
            return built[i]
        nj = nodes[i]
        kind = nj["kind"]
        restriction = regions[nj["restriction"]]
        children = [build(ch) for ch in nj["children"]]
        if kind == "empty":
            node = EmptyNode(solver, restriction)
        elif kind == "base":
            node = BaseNode(solver, restriction)
        elif kind == "C":
            node = CNode.__new__(CNode)
            Node.__init__(node, solver, restriction)
            node.rank = nj["rank"]
            node.X = [force(f) for f in nj["X"]]
            node.Z = [force(f) for f in nj["Z"]]
            node.Y = [regions[y] for y in nj["Y"]]
            node.subs = children
            node.alpha = len(node.X) - 1
            node.C = regions[nj["region"]]
            node._complement = node.X[-1].force
        elif kind == "D":
            node = DNode.__new__(DNode)
            Node.__init__(node, solver, restriction)
            node.rank = nj["rank"]
            node.U = [force(f) for f in nj["U"]]
            node.V = [regions[v] for v in nj["V"]]
            node.subs = children
            node.alpha = len(node.U) - 1
            node.D = regions[nj["region"]]
            node._complement = restriction - node.D
        else:
            raise ValueError(f"unknown node kind {kind!r}")
        built[i] = node
        return node

    return build(data)


def read_bundle(path: str | Path, state_cap: int = fa.DEFAULT_STATE_CAP) -> SymParityResult:
    root = Path(path)
    sys = parse_lcs((root / "system.lcs").read_text())
    u = SymbolicUniverse(sys, state_cap)
    arena = SymbolicArena(u)
    solver = Solver(arena)
    cert = json.loads((root / "certificate.json").read_text())
    regions = [SymbolicRegion.from_json(u, r) for r in cert["regions"]]
    built: dict[int, Node] = {}
    c = _node_from_json(solver, cert["root_c"], regions, built, cert["nodes"])
    d = _node_from_json(solver, cert["root_d"], regions, built, cert["nodes"])
    res = _partition(sys, u, cert["rank"], c, d, arena)
    for name in ("as_winner0", "as_winner1", "both_wpp"):
        stored = SymbolicRegion.from_json(u, json.loads((root / f"{name}.json").read_text()))
        if not stored.equals(res.region(name)):
            raise ValueError(f"bundle inconsistent: {name}.json disagrees with the certificate")
    meta_path = root / "metadata.json"
    if meta_path.exists():
        res.metrics = json.loads(meta_path.read_text()).get("metrics", {})
    return res
