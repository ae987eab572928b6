"""Explicit finite 2½-player game graphs.

A :class:`GameGraph` is immutable; state ids are dense naturals in file
order.  Regions are bitsets over the ids of one graph (bit ``i`` set means
state ``i`` is a member), which keeps the fixpoint code cheap on the small
games the oracle can handle and still linear on large ones.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

PROB_TOLERANCE = 1e-9


class Owner(enum.Enum):
    PLAYER0 = "0"
    PLAYER1 = "1"
    RANDOM = "R"

    @classmethod
    def of_player(cls, x: int) -> "Owner":
        if x not in (0, 1):
            raise ValueError(f"player must be 0 or 1, got {x!r}")
        return cls.PLAYER0 if x == 0 else cls.PLAYER1

    @property
    def player(self) -> int | None:
        """0 or 1 for player-owned states, ``None`` for random ones."""
        return {"0": 0, "1": 1}.get(self.value)


class GameFormatError(ValueError):
    """Syntax or reference error in a game file; carries the 1-based line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class InvalidGame(ValueError):
    def __init__(self, violations: list[tuple[str, int]]):
        self.violations = violations
        shown = ", ".join(f"{rule}@{sid}" for rule, sid in violations[:8])
        super().__init__(f"invalid game: {shown}")


@dataclass(frozen=True, eq=False)
class GameGraph:
    """Finite game: owners, colors, ordered successor lists, random-state probabilities.

    ``probs[s]`` is a tuple parallel to ``succ[s]`` for random states and
    ``None`` otherwise.  Construction does not check invariants; call
    :func:`validate` (the solvers do).
    """

    names: tuple[str, ...]
    owners: tuple[Owner, ...]
    colors: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    probs: tuple[tuple[float, ...] | None, ...]
    rank: int

    def __len__(self) -> int:
        return len(self.names)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        preds: list[list[int]] = [[] for _ in self.names]
        for s, targets in enumerate(self.succ):
            for t in targets:
                if 0 <= t < len(preds):
                    preds[t].append(s)
        return tuple(tuple(p) for p in preds)

    @cached_property
    def succ_mask(self) -> tuple[int, ...]:
        out = []
        for targets in self.succ:
            m = 0
            for t in targets:
                m |= 1 << t
            out.append(m)
        return tuple(out)

    @cached_property
    def sorted_succ(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(set(t))) for t in self.succ)

    def owner_mask(self, owner: Owner) -> int:
        return self._owner_masks[owner]

    @cached_property
    def _owner_masks(self) -> dict[Owner, int]:
        masks = {o: 0 for o in Owner}
        for i, o in enumerate(self.owners):
            masks[o] |= 1 << i
        return masks

    def color_mask(self, color: int) -> int:
        m = 0
        for i, c in enumerate(self.colors):
            if c == color:
                m |= 1 << i
        return m

    @property
    def max_color(self) -> int:
        return max(self.colors, default=0)

    def state_id(self, name_or_id: str | int) -> int:
        if isinstance(name_or_id, int):
            return name_or_id
        try:
            return self.index[name_or_id]
        except KeyError:
            raise KeyError(f"unknown state {name_or_id!r}") from None

    def same_as(self, other: "GameGraph") -> bool:
        """Structural equality (names, owners, colors, edges, probabilities, rank)."""
        return (
            self.names == other.names
            and self.owners == other.owners
            and self.colors == other.colors
            and self.succ == other.succ
            and self.probs == other.probs
            and self.rank == other.rank
        )


def make_game(
    states: Sequence[tuple[str, Owner | str | int, int]],
    edges: Mapping[str, Sequence[str]] | Sequence[tuple[str, str]],
    probs: Mapping[tuple[str, str], float] | None = None,
    rank: int | None = None,
) -> GameGraph:
    """Convenience builder from names.

    ``edges`` is either a name -> successor list map or a list of pairs;
    random states take their successors from ``probs`` when given and
    default to a uniform distribution over their edges otherwise.
    """
    names = [s[0] for s in states]
    index = {n: i for i, n in enumerate(names)}
    owners = [_coerce_owner(s[1]) for s in states]
    colors = [int(s[2]) for s in states]
    succ: list[list[int]] = [[] for _ in names]
    pairs = edges.items() if isinstance(edges, Mapping) else None
    if pairs is not None:
        for src, targets in pairs:
            succ[index[src]].extend(index[t] for t in targets)
    else:
        for src, dst in edges:
            succ[index[src]].append(index[dst])
    prob_rows: list[tuple[float, ...] | None] = [None] * len(names)
    probs = dict(probs or {})
    for (src, dst), p in probs.items():
        i, j = index[src], index[dst]
        if j not in succ[i]:
            succ[i].append(j)
    for i, o in enumerate(owners):
        if o is Owner.RANDOM:
            row = []
            for j in succ[i]:
                p = probs.get((names[i], names[j]))
                row.append(1.0 / len(succ[i]) if p is None else float(p))
            prob_rows[i] = tuple(row)
    return GameGraph(
        names=tuple(names),
        owners=tuple(owners),
        colors=tuple(colors),
        succ=tuple(tuple(s) for s in succ),
        probs=tuple(prob_rows),
        rank=max(colors, default=0) if rank is None else rank,
    )


def _coerce_owner(o: Owner | str | int) -> Owner:
    if isinstance(o, Owner):
        return o
    return Owner(str(o))


def validate(g: GameGraph) -> list[tuple[str, int]]:
    """List every invariant violation as ``(rule, state id)``; empty iff valid."""
    out: list[tuple[str, int]] = []
    n = len(g.names)
    for s in range(n):
        targets = g.succ[s]
        if not targets:
            out.append(("sink", s))
        if any(not 0 <= t < n for t in targets):
            out.append(("bad-edge", s))
        if len(set(targets)) != len(targets):
            out.append(("duplicate-edge", s))
        if not 0 <= g.colors[s] <= g.rank:
            out.append(("color-range", s))
        row = g.probs[s]
        if g.owners[s] is Owner.RANDOM:
            if row is None or len(row) != len(targets):
                out.append(("prob-shape", s))
                continue
            if any(not p > 0 for p in row):
                out.append(("prob-positive", s))
            if targets and abs(sum(row) - 1.0) > PROB_TOLERANCE:
                out.append(("prob-sum", s))
        elif row is not None:
            out.append(("prob-on-player-state", s))
    return out


def check_valid(g: GameGraph) -> GameGraph:
    violations = validate(g)
    if violations:
        raise InvalidGame(violations)
    return g


@dataclass(frozen=True)
class Region:
    """A set of states of one game, stored as a bitmask."""

    game: GameGraph = field(repr=False)
    mask: int = 0

    @classmethod
    def of(cls, game: GameGraph, states: Iterable[int | str] = ()) -> "Region":
        m = 0
        for s in states:
            m |= 1 << game.state_id(s)
        if m >> len(game):
            raise ValueError("region/universe mismatch: state id out of range")
        return cls(game, m)

    @classmethod
    def full(cls, game: GameGraph) -> "Region":
        return cls(game, game.full_mask)

    @classmethod
    def empty(cls, game: GameGraph) -> "Region":
        return cls(game, 0)

    @property
    def members(self) -> frozenset[int]:
        return frozenset(iter_bits(self.mask))

    def names(self) -> list[str]:
        return [self.game.names[i] for i in iter_bits(self.mask)]

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __contains__(self, s: object) -> bool:
        return isinstance(s, int) and s >= 0 and bool(self.mask >> s & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def _check(self, other: "Region") -> None:
        if other.game is not self.game:
            raise ValueError("region/universe mismatch")

    def __or__(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.game, self.mask | other.mask)

    def __and__(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.game, self.mask & other.mask)

    def __sub__(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.game, self.mask & ~other.mask)

    def __invert__(self) -> "Region":
        return Region(self.game, self.game.full_mask & ~self.mask)

    def __le__(self, other: "Region") -> bool:
        self._check(other)
        return self.mask & ~other.mask == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self.game is other.game and self.mask == other.mask

    def __hash__(self) -> int:
        return hash((id(self.game), self.mask))


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _mask_of(g: GameGraph, q: Region | int) -> int:
    if isinstance(q, Region):
        if q.game is not g:
            raise ValueError("region/universe mismatch")
        return q.mask
    if q >> len(g):
        raise ValueError("region/universe mismatch")
    return q


@dataclass(frozen=True)
class MemorylessStrategy:
    """Partial positional strategy of one player."""

    player: int
    choice: Mapping[int, int]

    def __call__(self, s: int) -> int | None:
        return self.choice.get(s)

    def check(self, g: GameGraph) -> list[tuple[str, int]]:
        bad = []
        owner = Owner.of_player(self.player)
        for s, t in self.choice.items():
            if g.owners[s] is not owner:
                bad.append(("not-owned", s))
            if t not in g.succ[s]:
                bad.append(("not-successor", s))
        return bad

    def to_names(self, g: GameGraph) -> dict[str, str]:
        return {g.names[s]: g.names[t] for s, t in sorted(self.choice.items())}


# -- one-step operators ----------------------------------------------------


def post(g: GameGraph, q: Region) -> Region:
    m = _mask_of(g, q)
    out = 0
    sm = g.succ_mask
    for s in iter_bits(m):
        out |= sm[s]
    return Region(g, out)


def _pre_exists_mask(g: GameGraph, m: int) -> int:
    out = 0
    preds = g.pred
    for t in iter_bits(m):
        for p in preds[t]:
            out |= 1 << p
    return out


def pre_exists(g: GameGraph, q: Region) -> Region:
    """States with at least one successor in ``q``."""
    return Region(g, _pre_exists_mask(g, _mask_of(g, q)))


def pre_forall(g: GameGraph, q: Region) -> Region:
    """States all of whose successors lie in ``q`` (dual of :func:`pre_exists`)."""
    m = _mask_of(g, q)
    return Region(g, g.full_mask & ~_pre_exists_mask(g, g.full_mask & ~m))


def is_sink_free(g: GameGraph, q: Region) -> bool:
    m = _mask_of(g, q)
    return all(g.succ_mask[s] & m for s in iter_bits(m))


def is_closable(g: GameGraph, q: Region) -> bool:
    m = _mask_of(g, q)
    if not is_sink_free(g, q):
        return False
    rnd = m & g.owner_mask(Owner.RANDOM)
    return all(g.succ_mask[s] & ~m == 0 for s in iter_bits(rnd))


def is_trap(g: GameGraph, x: int, q: Region) -> bool:
    """``q`` is closable and player ``x`` cannot leave it."""
    m = _mask_of(g, q)
    if not is_closable(g, q):
        return False
    own = m & g.owner_mask(Owner.of_player(x))
    return all(g.succ_mask[s] & ~m == 0 for s in iter_bits(own))


class NotClosable(ValueError):
    pass


def subgame(g: GameGraph, removed: Region, allow_empty: bool = False) -> tuple[GameGraph, dict[int, int]]:
    """Restrict ``g`` to the complement of ``removed``.

    Returns the new game and the old-id -> new-id map of kept states.
    Raises :class:`NotClosable` unless the kept part is closable.
    """
    keep = ~Region(g, _mask_of(g, removed))
    if not is_closable(g, keep):
        raise NotClosable("not-closable: complement of removed set is not closable")
    if not keep and not allow_empty:
        raise NotClosable("empty subgame (pass allow_empty=True to permit)")
    ids = list(keep)
    remap = {old: new for new, old in enumerate(ids)}
    succ, probs = [], []
    for old in ids:
        row = g.probs[old]
        pairs = [(k, t) for k, t in enumerate(g.succ[old]) if t in remap]
        succ.append(tuple(remap[t] for _, t in pairs))
        probs.append(None if row is None else tuple(row[k] for k, _ in pairs))
    sub = GameGraph(
        names=tuple(g.names[i] for i in ids),
        owners=tuple(g.owners[i] for i in ids),
        colors=tuple(g.colors[i] for i in ids),
        succ=tuple(succ),
        probs=tuple(probs),
        rank=g.rank,
    )
    return sub, remap


# -- text and JSON formats ---------------------------------------------------


def parse_game(text: str) -> GameGraph:
    """Parse the line-based game format.

    ::

        game rank=2
        state r owner=R color=0
        state a owner=1 color=1
        edge a -> a
        prob r -> a 0.5
    """
    rank = None
    names: list[str] = []
    index: dict[str, int] = {}
    owners: list[Owner] = []
    colors: list[int] = []
    succ: list[list[int]] = []
    probs: list[list[float] | None] = []
    pending: list[tuple[int, str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "game":
            if rank is not None:
                raise GameFormatError("duplicate game header", lineno)
            kv = _kv(words[1:], lineno)
            if set(kv) != {"rank"}:
                raise GameFormatError("expected 'game rank=<n>'", lineno)
            rank = _nat(kv["rank"], "rank", lineno)
        elif head == "state":
            if rank is None:
                raise GameFormatError("state before game header", lineno)
            if len(words) < 2:
                raise GameFormatError("state needs a name", lineno)
            name = words[1]
            if name in index:
                raise GameFormatError(f"duplicate state {name!r}", lineno)
            kv = _kv(words[2:], lineno)
            if set(kv) != {"owner", "color"}:
                raise GameFormatError("expected 'state <name> owner=<0|1|R> color=<c>'", lineno)
            if kv["owner"] not in ("0", "1", "R"):
                raise GameFormatError(f"bad owner {kv['owner']!r}", lineno)
            index[name] = len(names)
            names.append(name)
            owners.append(Owner(kv["owner"]))
            colors.append(_nat(kv["color"], "color", lineno))
            succ.append([])
            probs.append([] if kv["owner"] == "R" else None)
        elif head in ("edge", "prob"):
            pending.append((lineno, head, words))
        else:
            raise GameFormatError(f"unknown directive {head!r}", lineno)
    if rank is None:
        raise GameFormatError("missing 'game rank=<n>' header")
    for lineno, head, words in pending:
        want = 4 if head == "edge" else 5
        if len(words) != want or words[2] != "->":
            shape = "edge <from> -> <to>" if head == "edge" else "prob <from> -> <to> <p>"
            raise GameFormatError(f"expected '{shape}'", lineno)
        src, dst = words[1], words[3]
        for n in (src, dst):
            if n not in index:
                raise GameFormatError(f"unknown state {n!r}", lineno)
        i, j = index[src], index[dst]
        is_random = owners[i] is Owner.RANDOM
        if head == "edge" and is_random:
            raise GameFormatError(f"random state {src!r} takes 'prob' lines, not 'edge'", lineno)
        if head == "prob" and not is_random:
            raise GameFormatError(f"'prob' from non-random state {src!r}", lineno)
        if j in succ[i]:
            raise GameFormatError(f"duplicate edge {src} -> {dst}", lineno)
        succ[i].append(j)
        if head == "prob":
            try:
                p = float(words[4])
            except ValueError:
                raise GameFormatError(f"bad probability {words[4]!r}", lineno) from None
            probs[i].append(p)
    return GameGraph(
        names=tuple(names),
        owners=tuple(owners),
        colors=tuple(colors),
        succ=tuple(tuple(s) for s in succ),
        probs=tuple(None if p is None else tuple(p) for p in probs),
        rank=rank,
    )


def _kv(words: list[str], lineno: int) -> dict[str, str]:
    out = {}
    for w in words:
        if "=" not in w:
            raise GameFormatError(f"expected key=value, got {w!r}", lineno)
        k, v = w.split("=", 1)
        out[k] = v
    return out


def _nat(text: str, what: str, lineno: int | None) -> int:
    if not text.isdigit():
        raise GameFormatError(f"{what} must be a natural number, got {text!r}", lineno)
    return int(text)


def game_from_json(data: dict) -> GameGraph:
    try:
        rank = int(data["rank"])
        states = data["states"]
        lines = [f"game rank={rank}"]
        for st in states:
            lines.append(f"state {st['name']} owner={st['owner']} color={st['color']}")
        for src, dst in data.get("edges", []):
            lines.append(f"edge {src} -> {dst}")
        for src, dst, p in data.get("probs", []):
            lines.append(f"prob {src} -> {dst} {float(p)!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise GameFormatError(f"malformed JSON game: {exc}") from None
    return parse_game("\n".join(lines))


def game_to_json(g: GameGraph) -> dict:
    edges, probs = [], []
    for s, targets in enumerate(g.succ):
        row = g.probs[s]
        for k, t in enumerate(targets):
            if row is None:
                edges.append([g.names[s], g.names[t]])
            else:
                probs.append([g.names[s], g.names[t], row[k]])
    return {
        "rank": g.rank,
        "states": [
            {"name": n, "owner": o.value, "color": c}
            for n, o, c in zip(g.names, g.owners, g.colors)
        ],
        "edges": edges,
        "probs": probs,
    }


def format_game(g: GameGraph) -> str:
    lines = [f"game rank={g.rank}"]
    for n, o, c in zip(g.names, g.owners, g.colors):
        lines.append(f"state {n} owner={o.value} color={c}")
    for s, targets in enumerate(g.succ):
        row = g.probs[s]
        for k, t in enumerate(targets):
            if row is None:
                lines.append(f"edge {g.names[s]} -> {g.names[t]}")
            else:
                lines.append(f"prob {g.names[s]} -> {g.names[t]} {row[k]!r}")
    return "\n".join(lines) + "\n"


def load_game(path: str | Path) -> GameGraph:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GameFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        return game_from_json(data)
    return parse_game(text)
