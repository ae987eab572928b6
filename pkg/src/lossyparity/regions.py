"""Regular sets of configurations and the one-step predecessor operators on them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from . import automata as fa
from .automata import DFA, SEP
from .lcs import NOP, RECV, SEND, ConcreteConfig, LcsSystem, Transition, parse_config

Slot = tuple[int, int]  # (control state, phase)


class SymbolicUniverse:
    """Per-system constants shared by all regions: alphabet, shape, caps, caches."""

    def __init__(self, sys: LcsSystem, state_cap: int = fa.DEFAULT_STATE_CAP):
        self.sys = sys
        self.cap = state_cap
        self.alphabet = tuple(sys.messages) + (SEP,)
        self.k = len(sys.channels)
        self.shape = fa.shape_dfa(self.alphabet, self.k)
        self.slots: tuple[Slot, ...] = tuple((s, p) for s in range(len(sys.states)) for p in (1, 0))
        self._up: dict[tuple, DFA] = {}
        self._deadlock: SymbolicRegion | None = None

    def region(self, slots: Mapping[Slot, DFA]) -> "SymbolicRegion":
        return SymbolicRegion(self, {s: d for s, d in slots.items() if d.accepting})

    def empty(self) -> "SymbolicRegion":
        return SymbolicRegion(self, {})

    def full(self) -> "SymbolicRegion":
        return SymbolicRegion(self, {s: self.shape for s in self.slots})

    def up(self, d: DFA) -> DFA:
        got = self._up.get(d.key)
        if got is None:
            got = fa.up_closure(d, self.cap)
            self._up[d.key] = got
        return got

    def from_configs(self, cfgs: Iterable[ConcreteConfig]) -> "SymbolicRegion":
        by_slot: dict[Slot, list[str]] = {}
        for c in cfgs:
            by_slot.setdefault((c.ctrl, c.phase), []).append(c.encode())
        return self.region({s: fa.words_dfa(self.alphabet, ws, self.cap) for s, ws in by_slot.items()})

    def from_literals(self, literals: Iterable[str]) -> "SymbolicRegion":
        return self.from_configs(parse_config(self.sys, lit) for lit in literals)

    def slot_region(self, slot: Slot, d: DFA | None = None) -> "SymbolicRegion":
        return self.region({slot: self.shape if d is None else fa.intersect(d, self.shape, self.cap)})


@dataclass(frozen=True, eq=False)
class SymbolicRegion:
    """A set of configurations: one canonical DFA per (control, phase) slot.

    Missing slots are empty.  Every stored automaton is non-empty and
    accepts only words of the right shape.
    """

    universe: SymbolicUniverse
    slots: Mapping[Slot, DFA]

    def _check(self, other: "SymbolicRegion") -> None:
        if other.universe is not self.universe:
            raise ValueError("universe mismatch")

    @cached_property
    def key(self) -> tuple:
        return tuple(sorted((s, d.key) for s, d in self.slots.items()))

    def __or__(self, other: "SymbolicRegion") -> "SymbolicRegion":
        self._check(other)
        cap = self.universe.cap
        out = dict(self.slots)
        for s, d in other.slots.items():
            out[s] = fa.union(out[s], d, cap) if s in out else d
        return SymbolicRegion(self.universe, out)

    def __and__(self, other: "SymbolicRegion") -> "SymbolicRegion":
        self._check(other)
        cap = self.universe.cap
        out = {}
        for s, d in self.slots.items():
            e = other.slots.get(s)
            if e is not None:
                out[s] = fa.intersect(d, e, cap)
        return self.universe.region(out)

    def __sub__(self, other: "SymbolicRegion") -> "SymbolicRegion":
        self._check(other)
        cap = self.universe.cap
        out = {}
        for s, d in self.slots.items():
            e = other.slots.get(s)
            out[s] = d if e is None else fa.difference(d, e, cap)
        return self.universe.region(out)

    def __invert__(self) -> "SymbolicRegion":
        return self.universe.full() - self

    def is_empty(self) -> bool:
        return not self.slots

    def equals(self, other: "SymbolicRegion") -> bool:
        self._check(other)
        return self.key == other.key

    def __le__(self, other: "SymbolicRegion") -> bool:
        return (self - other).is_empty()

    def member(self, cfg: ConcreteConfig) -> bool:
        d = self.slots.get((cfg.ctrl, cfg.phase))
        return d is not None and d.accepts(cfg.encode())

    __contains__ = member

    def only_slots(self, keep) -> "SymbolicRegion":
        return SymbolicRegion(self.universe, {s: d for s, d in self.slots.items() if keep(s)})

    def up_closure(self) -> "SymbolicRegion":
        u = self.universe
        return SymbolicRegion(u, {s: u.up(d) for s, d in self.slots.items()})

    def dfa_sizes(self) -> dict[Slot, int]:
        return {s: d.size for s, d in sorted(self.slots.items())}

    def to_json(self) -> dict:
        sys = self.universe.sys
        return {
            f"{sys.states[c]}/{p}": d.to_json() for (c, p), d in sorted(self.slots.items())
        }

    @classmethod
    def from_json(cls, universe: SymbolicUniverse, data: Mapping) -> "SymbolicRegion":
        sys = universe.sys
        out = {}
        for name, dj in data.items():
            ctrl, _, phase = name.rpartition("/")
            if ctrl not in sys.state_index or phase not in ("0", "1"):
                raise ValueError(f"bad slot {name!r}")
            d = DFA.from_json(dj)
            if d.alphabet != universe.alphabet:
                raise ValueError(f"slot {name!r}: alphabet mismatch")
            out[(sys.state_index[ctrl], int(phase))] = fa.intersect(d, universe.shape, universe.cap)
        return universe.region(out)


# -- predecessor operators -------------------------------------------------------


def _slot_map(r: SymbolicRegion, src: Slot, dst: Slot, f) -> SymbolicRegion:
    d = r.slots.get(src)
    if d is None:
        return r.universe.empty()
    return r.universe.region({dst: f(d)})


def pre_nop(r: SymbolicRegion, s: int, s2: int) -> SymbolicRegion:
    return _slot_map(r, (s2, 0), (s, 1), lambda d: d)


def pre_send(r: SymbolicRegion, s: int, s2: int, c: int, m: str) -> SymbolicRegion:
    u = r.universe
    return _slot_map(r, (s2, 0), (s, 1), lambda d: fa.pre_append(d, u.k, c, m, u.cap))


def pre_recv(r: SymbolicRegion, s: int, s2: int, c: int, m: str) -> SymbolicRegion:
    u = r.universe
    return _slot_map(r, (s2, 0), (s, 1), lambda d: fa.pre_pop(d, u.k, c, m, u.cap))


def pre_transition(r: SymbolicRegion, t: Transition) -> SymbolicRegion:
    if t.kind == NOP:
        return pre_nop(r, t.source, t.target)
    if t.kind == SEND:
        return pre_send(r, t.source, t.target, t.channel, t.message)
    return pre_recv(r, t.source, t.target, t.channel, t.message)


def pre_loss(r: SymbolicRegion) -> SymbolicRegion:
    """Phase-0 configurations with some loss outcome in ``r``."""
    u = r.universe
    return u.region({(c, 0): u.up(d) for (c, p), d in r.slots.items() if p == 1})


def deadlock_set(u: SymbolicUniverse) -> SymbolicRegion:
    """Phase-1 configurations where no transition is enabled."""
    if u._deadlock is not None:
        return u._deadlock
    sys = u.sys
    out = {}
    for s in range(len(sys.states)):
        ts = [sys.transitions[i] for i in sys.outgoing[s]]
        if any(t.kind != RECV for t in ts):
            continue
        d = u.shape
        for t in ts:
            starts = fa.pre_pop(u.shape, u.k, t.channel, t.message, u.cap)
            d = fa.difference(d, starts, u.cap)
        out[(s, 1)] = d
    u._deadlock = u.region(out)
    return u._deadlock


def pre_fallback(r: SymbolicRegion) -> SymbolicRegion:
    u = r.universe
    shifted = u.region({(c, 1): d for (c, p), d in r.slots.items() if p == 0})
    return deadlock_set(u) & shifted


def pre_exists_sym(r: SymbolicRegion, restriction: SymbolicRegion | None = None) -> SymbolicRegion:
    """Configurations with at least one successor in ``r`` (inside ``restriction``)."""
    u = r.universe
    if restriction is not None:
        r = r & restriction
    out = pre_loss(r) | pre_fallback(r)
    for t in u.sys.transitions:
        out = out | pre_transition(r, t)
    if restriction is not None:
        out = out & restriction
    return out


def pre_forall_sym(r: SymbolicRegion, restriction: SymbolicRegion | None = None) -> SymbolicRegion:
    """Configurations of ``restriction`` whose successors inside it all lie in ``r``."""
    u = r.universe
    g = u.full() if restriction is None else restriction
    return g - pre_exists_sym(g - r, g)


def is_closable(restriction: SymbolicRegion) -> bool:
    """Random configurations keep every loss outcome inside; player ones keep some move inside."""
    outside = ~restriction
    rnd_leak = restriction.only_slots(lambda s: s[1] == 0) & pre_loss(outside)
    if not rnd_leak.is_empty():
        return False
    players = restriction.only_slots(lambda s: s[1] == 1)
    return (players - pre_exists_sym(restriction)).is_empty()
