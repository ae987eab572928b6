"""Complete deterministic automata over channel valuations.

A valuation of ``k`` channels is encoded as ``w_1#w_2#...#w_k``.  Every
automaton here is a canonical minimal complete DFA: states are numbered in
breadth-first order from the initial state (0), reading symbols in alphabet
order.  Two automata over the same alphabet are therefore equal as values
iff they accept the same language, and :attr:`DFA.key` can be used as a
dictionary key.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable

SEP = "#"
DEFAULT_STATE_CAP = 100_000


class AutomatonCapExceeded(RuntimeError):
    def __init__(self, cap: int):
        super().__init__(f"cap-exceeded: automaton construction exceeded {cap} states")
        self.cap = cap


@dataclass(frozen=True)
class DFA:
    alphabet: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]  # delta[state][symbol index]
    accepting: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.delta)

    @cached_property
    def key(self) -> tuple:
        return (self.delta, tuple(sorted(self.accepting)))

    @cached_property
    def sym_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.alphabet)}

    def step(self, q: int, a: str) -> int:
        return self.delta[q][self.sym_index[a]]

    def run(self, word: str) -> int:
        q = 0
        idx = self.sym_index
        for ch in word:
            i = idx.get(ch)
            if i is None:
                return -1
            q = self.delta[q][i]
        return q

    def accepts(self, word: str) -> bool:
        return self.run(word) in self.accepting

    def is_empty(self) -> bool:
        # canonical automata keep only reachable states
        return not self.accepting

    def to_json(self) -> dict:
        return {
            "states": self.size,
            "alphabet": list(self.alphabet),
            "initial": 0,
            "accepting": sorted(self.accepting),
            "transitions": [
                [q, a, row[i]] for q, row in enumerate(self.delta) for i, a in enumerate(self.alphabet)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DFA":
        alphabet = tuple(data["alphabet"])
        n = int(data["states"])
        idx = {a: i for i, a in enumerate(alphabet)}
        rows = [[-1] * len(alphabet) for _ in range(n)]
        for q, a, r in data["transitions"]:
            rows[q][idx[a]] = r
        if any(r < 0 for row in rows for r in row):
            raise ValueError("automaton JSON is not complete")
        init = int(data.get("initial", 0))
        acc = frozenset(data["accepting"])
        return explore(alphabet, init, lambda q, i: rows[q][i], lambda q: q in acc)


def explore(
    alphabet: tuple[str, ...],
    init: Hashable,
    step: Callable[[Hashable, int], Hashable],
    accept: Callable[[Hashable], bool],
    cap: int = DEFAULT_STATE_CAP,
) -> DFA:
    """Build the reachable part of an implicit deterministic automaton, then minimize.

    ``step(q, i)`` gets the symbol index; returning ``None`` means the dead state.
    """
    ids: dict[Hashable, int] = {init: 0}
    order = [init]
    rows: list[list[int]] = []
    dead = -1
    queue = deque([init])
    while queue:
        q = queue.popleft()
        row = []
        for i in range(len(alphabet)):
            r = step(q, i)
            if r is None:
                if dead < 0:
                    dead = -2  # allocate after the loop
                row.append(-1)
                continue
            j = ids.get(r)
            if j is None:
                j = len(order)
                if j >= cap:
                    raise AutomatonCapExceeded(cap)
                ids[r] = j
                order.append(r)
                queue.append(r)
            row.append(j)
        rows.append(row)
    n = len(order)
    acc = {i for i, q in enumerate(order) if accept(q)}
    if dead == -2:
        rows.append([n] * len(alphabet))
        rows = [[n if r == -1 else r for r in row] for row in rows]
        n += 1
    return minimize(alphabet, rows, acc)


def determinize(
    alphabet: tuple[str, ...],
    initials: Iterable[Hashable],
    step: Callable[[Hashable, int], Iterable[Hashable]],
    accept: Callable[[Hashable], bool],
    cap: int = DEFAULT_STATE_CAP,
) -> DFA:
    """Subset construction for an implicit epsilon-free NFA."""

    def sstep(qs, i):
        out = set()
        for q in qs:
            out.update(step(q, i))
        return frozenset(out) if out else None

    return explore(alphabet, frozenset(initials), sstep, lambda qs: any(accept(q) for q in qs), cap)


def minimize(alphabet: tuple[str, ...], rows: list[list[int]], accepting: set[int]) -> DFA:
    """Hopcroft partition refinement on a complete DFA whose states are all reachable,
    followed by canonical renumbering."""
    n = len(rows)
    k = len(alphabet)
    inv: list[list[list[int]]] = [[[] for _ in range(n)] for _ in range(k)]
    for q, row in enumerate(rows):
        for i, r in enumerate(row):
            inv[i][r].append(q)
    acc = set(accepting)
    rej = set(range(n)) - acc
    blocks: list[set[int]] = [b for b in (acc, rej) if b]
    block_of = [0] * n
    for bi, b in enumerate(blocks):
        for q in b:
            block_of[q] = bi
    work = deque()
    in_work = set()
    if len(blocks) == 2:
        smaller = 0 if len(blocks[0]) <= len(blocks[1]) else 1
        for i in range(k):
            work.append((smaller, i))
            in_work.add((smaller, i))
    while work:
        bi, i = work.popleft()
        in_work.discard((bi, i))
        splitter = blocks[bi]
        pre = set()
        for q in splitter:
            pre.update(inv[i][q])
        touched: dict[int, set[int]] = {}
        for p in pre:
            touched.setdefault(block_of[p], set()).add(p)
        for bj, hit in touched.items():
            b = blocks[bj]
            if len(hit) == len(b):
                continue
            rest = b - hit
            blocks[bj] = hit
            new = len(blocks)
            blocks.append(rest)
            for q in rest:
                block_of[q] = new
            for j in range(k):
                if (bj, j) in in_work:
                    work.append((new, j))
                    in_work.add((new, j))
                else:
                    pick = bj if len(hit) <= len(rest) else new
                    work.append((pick, j))
                    in_work.add((pick, j))
    # canonical BFS numbering of the quotient
    start = block_of[0]
    ids = {start: 0}
    order = [start]
    reps = {bi: next(iter(b)) for bi, b in enumerate(blocks)}
    delta = []
    qi = 0
    while qi < len(order):
        b = order[qi]
        qi += 1
        rep = reps[b]
        row = []
        for i in range(k):
            t = block_of[rows[rep][i]]
            if t not in ids:
                ids[t] = len(order)
                order.append(t)
            row.append(ids[t])
        delta.append(tuple(row))
    accepting_out = frozenset(ids[b] for b in order if reps[b] in acc)
    return DFA(alphabet, tuple(delta), accepting_out)


# -- constructors ----------------------------------------------------------------


def empty_dfa(alphabet: tuple[str, ...]) -> DFA:
    return DFA(alphabet, (tuple(0 for _ in alphabet),), frozenset())


def universal_dfa(alphabet: tuple[str, ...]) -> DFA:
    return DFA(alphabet, (tuple(0 for _ in alphabet),), frozenset({0}))


def shape_dfa(alphabet: tuple[str, ...], k: int) -> DFA:
    """Words with exactly ``k - 1`` separators (``{""}`` when ``k == 0``)."""
    sep = alphabet.index(SEP)
    if k == 0:
        return explore(alphabet, 0, lambda q, i: None, lambda q: True)
    return explore(
        alphabet,
        0,
        lambda q, i: (q + 1 if q + 1 < k else None) if i == sep else q,
        lambda q: q == k - 1,
    )


def words_dfa(alphabet: tuple[str, ...], words: Iterable[str], cap: int = DEFAULT_STATE_CAP) -> DFA:
    """Finite language; the trie is deterministic already."""
    ws = sorted(set(words))
    return explore(
        alphabet,
        "",
        lambda p, i: p + alphabet[i] if any(w.startswith(p + alphabet[i]) for w in ws) else None,
        lambda p: p in ws,
        cap,
    )


# -- boolean operations -------------------------------------------------------------


def product(a: DFA, b: DFA, op: Callable[[bool, bool], bool], cap: int = DEFAULT_STATE_CAP) -> DFA:
    if a.alphabet != b.alphabet:
        raise ValueError("alphabet mismatch")
    da, db = a.delta, b.delta
    fa, fb = a.accepting, b.accepting
    return explore(
        a.alphabet,
        (0, 0),
        lambda q, i: (da[q[0]][i], db[q[1]][i]),
        lambda q: op(q[0] in fa, q[1] in fb),
        cap,
    )


def union(a: DFA, b: DFA, cap: int = DEFAULT_STATE_CAP) -> DFA:
    if not a.accepting:
        return b
    if not b.accepting or a == b:
        return a
    return product(a, b, lambda x, y: x or y, cap)


def intersect(a: DFA, b: DFA, cap: int = DEFAULT_STATE_CAP) -> DFA:
    if not a.accepting or a == b:
        return a
    if not b.accepting:
        return b
    return product(a, b, lambda x, y: x and y, cap)


def difference(a: DFA, b: DFA, cap: int = DEFAULT_STATE_CAP) -> DFA:
    if not a.accepting or not b.accepting:
        return a
    if a == b:
        return empty_dfa(a.alphabet)
    return product(a, b, lambda x, y: x and not y, cap)


def complement_in(a: DFA, universe: DFA, cap: int = DEFAULT_STATE_CAP) -> DFA:
    return difference(universe, a, cap)


# -- channel-aware constructions --------------------------------------------------


def up_closure(a: DFA, cap: int = DEFAULT_STATE_CAP) -> DFA:
    """Words that have some accepted word as a section-wise subword.

    Reading a message symbol may also be skipped (the symbol counts as
    deleted).  Separators are always read, so sections stay aligned.
    """
    if not a.accepting:
        return a
    sep = a.alphabet.index(SEP)
    d = a.delta

    def step(q, i):
        if i == sep:
            return (d[q][i],)
        return (d[q][i], q)

    return determinize(a.alphabet, (0,), step, lambda q: q in a.accepting, cap)


def pre_append(a: DFA, k: int, channel: int, message: str, cap: int = DEFAULT_STATE_CAP) -> DFA:
    """``{x : x with message appended to section channel is accepted}``, within shape."""
    sep = a.alphabet.index(SEP)
    m = a.alphabet.index(message)
    d = a.delta

    def step(st, i):
        q, sec = st
        if i == sep:
            if sec + 1 >= k:
                return None
            if sec == channel:
                q = d[q][m]
            return (d[q][i], sec + 1)
        return (d[q][i], sec)

    def accept(st):
        q, sec = st
        if sec != k - 1:
            return False
        if sec == channel:
            q = d[q][m]
        return q in a.accepting

    if k == 0:
        raise ValueError("no channel to send on")
    return explore(a.alphabet, (0, 0), step, accept, cap)


def pre_pop(a: DFA, k: int, channel: int, message: str, cap: int = DEFAULT_STATE_CAP) -> DFA:
    """``{x : section channel starts with message and x minus that head is accepted}``."""
    if k == 0:
        raise ValueError("no channel to receive from")
    sep = a.alphabet.index(SEP)
    m = a.alphabet.index(message)
    d = a.delta

    def step(st, i):
        q, sec, pending = st
        if pending:
            return (q, sec, False) if i == m else None
        if i == sep:
            if sec + 1 >= k:
                return None
            return (d[q][i], sec + 1, sec + 1 == channel)
        return (d[q][i], sec, False)

    def accept(st):
        q, sec, pending = st
        return not pending and sec == k - 1 and q in a.accepting

    return explore(a.alphabet, (0, 0, channel == 0), step, accept, cap)
