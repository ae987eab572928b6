"""Lossy channel systems with two players and the game they induce.

A configuration is a control state, one word per channel, and a phase.
Phase 1 belongs to the owner of the control state, who fires an enabled
transition (or the fallback step when none is enabled).  Phase 0 is random:
every message in every channel is lost independently with rate ``lambda``.
Messages are single alphanumeric characters so a channel word is a string.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

from . import kernels
from .game import GameGraph, Owner

DEFAULT_LOSS_CAP = 12
DEFAULT_EXPAND_CAP = 200_000

NOP = "nop"
SEND = "send"
RECV = "recv"
FALLBACK = -1


class LcsFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Transition:
    source: int
    kind: str  # NOP, SEND or RECV
    channel: int  # -1 for nop
    message: str  # "" for nop
    target: int

    def label(self, sys: "LcsSystem") -> str:
        if self.kind == NOP:
            op = "nop"
        else:
            op = f"{sys.channels[self.channel]}{'!' if self.kind == SEND else '?'}{self.message}"
        return f"{sys.states[self.source]} -> {sys.states[self.target]} {op}"


@dataclass(frozen=True, eq=False)
class LcsSystem:
    states: tuple[str, ...]
    owners: tuple[int, ...]
    colors: tuple[int, ...]
    channels: tuple[str, ...]
    messages: tuple[str, ...]
    transitions: tuple[Transition, ...]
    lam: float
    rank: int

    @cached_property
    def outgoing(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.states]
        for i, t in enumerate(self.transitions):
            out[t.source].append(i)
        return tuple(tuple(o) for o in out)

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.states)}

    @cached_property
    def channel_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.channels)}

    @property
    def max_color(self) -> int:
        return max(self.colors)


@dataclass(frozen=True, order=True)
class ConcreteConfig:
    ctrl: int
    channels: tuple[str, ...]
    phase: int

    def encode(self) -> str:
        """Channel words joined by the separator, as read by the region automata."""
        return "#".join(self.channels)


# -- parsing -----------------------------------------------------------------


def _kv(words: list[str], lineno: int) -> dict[str, str]:
    out = {}
    for w in words:
        if "=" not in w:
            raise LcsFormatError(f"expected key=value, got {w!r}", lineno)
        k, v = w.split("=", 1)
        out[k] = v
    return out


def parse_lcs(text: str) -> LcsSystem:
    """Parse the LCS format::

        lcs rank=1 lambda=0.5
        channels c
        messages a b
        state q0 player=0 color=0
        trans q0 -> q1 c!a
    """
    header = None
    channels: list[str] | None = None
    messages: list[str] | None = None
    states: list[str] = []
    owners: list[int] = []
    colors: list[int] = []
    state_lines: list[int] = []
    pending: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "lcs":
            if header is not None:
                raise LcsFormatError("duplicate lcs header", lineno)
            kv = _kv(words[1:], lineno)
            if set(kv) != {"rank", "lambda"}:
                raise LcsFormatError("expected 'lcs rank=<n> lambda=<float>'", lineno)
            if not kv["rank"].isdigit():
                raise LcsFormatError(f"rank must be a natural number, got {kv['rank']!r}", lineno)
            try:
                lam = float(kv["lambda"])
            except ValueError:
                raise LcsFormatError(f"bad lambda {kv['lambda']!r}", lineno) from None
            if not (0.0 < lam < 1.0):
                raise LcsFormatError("lambda must be in (0,1)", lineno)
            header = (int(kv["rank"]), lam)
        elif head == "channels":
            if channels is not None:
                raise LcsFormatError("duplicate channels line", lineno)
            channels = words[1:]
            if len(set(channels)) != len(channels):
                raise LcsFormatError("duplicate channel name", lineno)
            for c in channels:
                if not c.isidentifier():
                    raise LcsFormatError(f"bad channel name {c!r}", lineno)
        elif head == "messages":
            if messages is not None:
                raise LcsFormatError("duplicate messages line", lineno)
            messages = words[1:]
            if len(set(messages)) != len(messages):
                raise LcsFormatError("duplicate message symbol", lineno)
            for m in messages:
                if len(m) != 1 or not m.isalnum() or not m.isascii():
                    raise LcsFormatError(f"message symbols are single alphanumeric characters, got {m!r}", lineno)
        elif head == "state":
            if len(words) < 2:
                raise LcsFormatError("state needs a name", lineno)
            name = words[1]
            if name in states:
                raise LcsFormatError(f"duplicate state {name!r}", lineno)
            if not name.isidentifier():
                raise LcsFormatError(f"bad state name {name!r}", lineno)
            kv = _kv(words[2:], lineno)
            if set(kv) != {"player", "color"}:
                raise LcsFormatError("expected 'state <name> player=<0|1> color=<c>'", lineno)
            if kv["player"] not in ("0", "1"):
                raise LcsFormatError(f"player must be 0 or 1, got {kv['player']!r}", lineno)
            if not kv["color"].isdigit():
                raise LcsFormatError(f"color must be a natural number, got {kv['color']!r}", lineno)
            states.append(name)
            owners.append(int(kv["player"]))
            colors.append(int(kv["color"]))
            state_lines.append(lineno)
        elif head == "trans":
            pending.append((lineno, words))
        else:
            raise LcsFormatError(f"unknown directive {head!r}", lineno)
    if header is None:
        raise LcsFormatError("missing 'lcs rank=<n> lambda=<float>' header")
    rank, lam = header
    channels = channels or []
    messages = messages or []
    if not states:
        raise LcsFormatError("at least one control state is required")
    for c, ln in zip(colors, state_lines):
        if c > rank:
            raise LcsFormatError(f"color {c} exceeds rank {rank}", ln)
    sidx = {n: i for i, n in enumerate(states)}
    cidx = {n: i for i, n in enumerate(channels)}
    trans = []
    for lineno, words in pending:
        if len(words) != 5 or words[2] != "->":
            raise LcsFormatError("expected 'trans <from> -> <to> <c>!<m>|<c>?<m>|nop'", lineno)
        src, dst, op = words[1], words[3], words[4]
        for n in (src, dst):
            if n not in sidx:
                raise LcsFormatError(f"unknown state {n!r}", lineno)
        if op == "nop":
            trans.append(Transition(sidx[src], NOP, -1, "", sidx[dst]))
            continue
        for sym, kind in (("!", SEND), ("?", RECV)):
            if sym in op:
                ch, msg = op.split(sym, 1)
                break
        else:
            raise LcsFormatError(f"bad operation {op!r}", lineno)
        if ch not in cidx:
            raise LcsFormatError(f"unknown channel {ch!r}", lineno)
        if msg not in messages:
            raise LcsFormatError(f"unknown message {msg!r}", lineno)
        trans.append(Transition(sidx[src], kind, cidx[ch], msg, sidx[dst]))
    return LcsSystem(
        states=tuple(states),
        owners=tuple(owners),
        colors=tuple(colors),
        channels=tuple(channels),
        messages=tuple(messages),
        transitions=tuple(trans),
        lam=lam,
        rank=rank,
    )


def load_lcs(path: str | Path) -> LcsSystem:
    return parse_lcs(Path(path).read_text())


def format_lcs(sys: LcsSystem) -> str:
    lines = [f"lcs rank={sys.rank} lambda={sys.lam!r}"]
    lines.append(" ".join(["channels", *sys.channels]))
    lines.append(" ".join(["messages", *sys.messages]))
    for n, o, c in zip(sys.states, sys.owners, sys.colors):
        lines.append(f"state {n} player={o} color={c}")
    for t in sys.transitions:
        lines.append("trans " + t.label(sys))
    return "\n".join(lines) + "\n"


# -- configuration literals ----------------------------------------------------


def parse_config(sys: LcsSystem, literal: str) -> ConcreteConfig:
    """Parse ``<ctrl> | <chan>=<word>,... | phase=<0|1>``; missing channels are empty."""
    parts = [p.strip() for p in literal.split("|")]
    if len(parts) != 3:
        raise LcsFormatError(f"config literal needs three '|'-separated parts: {literal!r}")
    ctrl, chans, phase = parts
    if ctrl not in sys.state_index:
        raise LcsFormatError(f"unknown state {ctrl!r}")
    if phase not in ("phase=0", "phase=1"):
        raise LcsFormatError(f"expected phase=0 or phase=1, got {phase!r}")
    words = [""] * len(sys.channels)
    seen = set()
    if chans:
        for item in chans.split(","):
            item = item.strip()
            if "=" not in item:
                raise LcsFormatError(f"expected <chan>=<word>, got {item!r}")
            name, word = item.split("=", 1)
            name = name.strip()
            word = word.strip()
            if name not in sys.channel_index:
                raise LcsFormatError(f"unknown channel {name!r}")
            if name in seen:
                raise LcsFormatError(f"channel {name!r} given twice")
            seen.add(name)
            bad = [ch for ch in word if ch not in sys.messages]
            if bad:
                raise LcsFormatError(f"unknown message {bad[0]!r} in channel {name!r}")
            words[sys.channel_index[name]] = word
    return ConcreteConfig(sys.state_index[ctrl], tuple(words), int(phase[-1]))


def format_config(sys: LcsSystem, cfg: ConcreteConfig) -> str:
    chans = ",".join(f"{c}={w}" for c, w in zip(sys.channels, cfg.channels))
    return f"{sys.states[cfg.ctrl]} | {chans} | phase={cfg.phase}"


# -- words -------------------------------------------------------------------


def subword_leq(x: str, y: str) -> bool:
    """``x`` arises from ``y`` by deleting positions."""
    it = iter(y)
    return all(ch in it for ch in x)


def embedding_count(y: str, x: str) -> int:
    """Number of position subsets of ``y`` whose deletion leaves ``x``."""
    return kernels.embedding_count(y, x)


def distinct_subwords(y: str) -> list[str]:
    """All distinct subwords of ``y``, longest first, then lexicographic."""
    out = {""}
    for ch in y:
        out |= {w + ch for w in out}
    return sorted(out, key=lambda w: (-len(w), w))


# -- induced game semantics ------------------------------------------------------


def config_color(sys: LcsSystem, cfg: ConcreteConfig) -> int:
    return sys.colors[cfg.ctrl]


def config_owner(sys: LcsSystem, cfg: ConcreteConfig) -> int | None:
    """0 or 1 at phase 1, None (random) at phase 0."""
    return sys.owners[cfg.ctrl] if cfg.phase == 1 else None


def fire(sys: LcsSystem, t: Transition, cfg: ConcreteConfig) -> ConcreteConfig | None:
    """Result of transition ``t`` at phase-1 ``cfg``, or None if it is disabled."""
    words = cfg.channels
    if t.kind == SEND:
        words = words[: t.channel] + (words[t.channel] + t.message,) + words[t.channel + 1 :]
    elif t.kind == RECV:
        w = words[t.channel]
        if not w.startswith(t.message):
            return None
        words = words[: t.channel] + (w[1:],) + words[t.channel + 1 :]
    return ConcreteConfig(t.target, words, 0)


def player_successors(
    sys: LcsSystem, cfg: ConcreteConfig, max_len: int | None = None
) -> list[tuple[int, ConcreteConfig]]:
    """``(transition index, successor)`` pairs in declaration order.

    With no enabled transition the single pair is ``(FALLBACK, same config at
    phase 0)``.  ``max_len`` disables sends that would exceed that length.
    """
    if cfg.phase != 1:
        raise ValueError("wrong-phase: player successors need a phase-1 configuration")
    out = []
    for i in sys.outgoing[cfg.ctrl]:
        t = sys.transitions[i]
        if max_len is not None and t.kind == SEND and len(cfg.channels[t.channel]) >= max_len:
            continue
        nxt = fire(sys, t, cfg)
        if nxt is not None:
            out.append((i, nxt))
    if not out:
        out.append((FALLBACK, ConcreteConfig(cfg.ctrl, cfg.channels, 0)))
    return out


@dataclass(frozen=True)
class LossOutcome:
    channels: tuple[str, ...]
    probability: float
    ways: int  # a: number of deletion sets
    lost: int  # b
    kept: int  # c

    def config(self, ctrl: int) -> ConcreteConfig:
        return ConcreteConfig(ctrl, self.channels, 1)


def loss_distribution(sys: LcsSystem, cfg: ConcreteConfig, cap: int = DEFAULT_LOSS_CAP) -> list[LossOutcome]:
    """Exact one-step loss distribution from a phase-0 configuration."""
    if cfg.phase != 0:
        raise ValueError("wrong-phase: loss distribution needs a phase-0 configuration")
    return loss_outcomes(cfg.channels, sys.lam, cap)


def loss_outcomes(words: tuple[str, ...], lam: float, cap: int = DEFAULT_LOSS_CAP) -> list[LossOutcome]:
    total = sum(len(w) for w in words)
    if total > cap:
        raise TooLarge(f"too-large: total channel length {total} exceeds cap {cap}")
    per_channel = []
    for w in words:
        per_channel.append([(x, embedding_count(w, x), len(w) - len(x), len(x)) for x in distinct_subwords(w)])
    out = []
    for combo in itertools.product(*per_channel):
        a = math.prod(item[1] for item in combo)
        b = sum(item[2] for item in combo)
        c = sum(item[3] for item in combo)
        out.append(LossOutcome(tuple(item[0] for item in combo), a * lam**b * (1 - lam) ** c, a, b, c))
    return out


def attractor_contains(cfg: ConcreteConfig) -> bool:
    return not any(cfg.channels)


def all_words(messages: tuple[str, ...], k: int) -> list[str]:
    """Every word of length at most ``k``, shortest first, then in declaration order."""
    out = [""]
    layer = [""]
    for _ in range(k):
        layer = [w + m for w in layer for m in messages]
        out.extend(layer)
    return out


def all_configs(sys: LcsSystem, k: int) -> Iterator[ConcreteConfig]:
    """Every configuration with each channel of length at most ``k``; phase 1 first."""
    words = all_words(sys.messages, k)
    for ctrl in range(len(sys.states)):
        for chans in itertools.product(words, repeat=len(sys.channels)):
            for phase in (1, 0):
                yield ConcreteConfig(ctrl, chans, phase)


@dataclass(frozen=True, eq=False)
class BoundedExpansion:
    game: GameGraph
    configs: tuple[ConcreteConfig, ...]
    ids: dict[ConcreteConfig, int]
    bound: int


def expand_bounded(sys: LcsSystem, k: int, size_cap: int = DEFAULT_EXPAND_CAP) -> BoundedExpansion:
    """Explicit game on configurations with every channel of length at most ``k``.

    Sends that would exceed ``k`` are disabled, which may enable the fallback
    step.  Successors reached by several transitions appear once.
    """
    if k < 0:
        raise ValueError("bound must be non-negative")
    n_words = sum(len(sys.messages) ** i for i in range(k + 1))
    size = 2 * len(sys.states) * n_words ** len(sys.channels)
    if size > size_cap:
        raise TooLarge(f"too-large: expansion has {size} states, cap {size_cap}")
    configs = tuple(all_configs(sys, k))
    ids = {c: i for i, c in enumerate(configs)}
    owners, colors, succ, probs, names = [], [], [], [], []
    for cfg in configs:
        names.append(f"{sys.states[cfg.ctrl]}|{','.join(cfg.channels)}|{cfg.phase}")
        colors.append(sys.colors[cfg.ctrl])
        if cfg.phase == 1:
            owners.append(Owner.of_player(sys.owners[cfg.ctrl]))
            row = []
            for _, nxt in player_successors(sys, cfg, max_len=k):
                j = ids[nxt]
                if j not in row:
                    row.append(j)
            succ.append(tuple(row))
            probs.append(None)
        else:
            owners.append(Owner.RANDOM)
            outs = loss_outcomes(cfg.channels, sys.lam, cap=max(DEFAULT_LOSS_CAP, k * len(sys.channels)))
            succ.append(tuple(ids[o.config(cfg.ctrl)] for o in outs))
            probs.append(tuple(o.probability for o in outs))
    game = GameGraph(
        names=tuple(names),
        owners=tuple(owners),
        colors=tuple(colors),
        succ=tuple(succ),
        probs=tuple(probs),
        rank=sys.rank,
    )
    return BoundedExpansion(game, configs, ids, k)
