"""Seeded Monte Carlo plays on explicit games and on lossy channel games.

Explicit plays: trial ``t`` reads uniforms ``t*horizon .. (t+1)*horizon - 1``
of one PCG64 stream, one uniform per step, so any block of trials can be
reproduced independently by advancing the generator.  LCS plays use one
generator per trial seeded from ``(seed, t)``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import kernels
from .game import GameGraph, MemorylessStrategy, Owner, Region
from .lcs import ConcreteConfig, LcsSystem, attractor_contains, player_successors
from .oracle import FiniteMemoryStrategy
from .reach import csr, mask_to_flags

RNG_NAME = "PCG64"
_CHUNK = 4096


@dataclass
class PlayStats:
    trials: int
    horizon: int
    seed: int
    rng: str = RNG_NAME
    hits: int = 0
    first_hit_steps: list[int] = field(default_factory=list)
    color_counts: dict[int, int] = field(default_factory=dict)
    attractor_visits: int = 0
    trials_visiting_attractor: int = 0
    last_attractor_visit: list[int] = field(default_factory=list)
    region_exits: int = 0
    exit_kinds: dict[str, int] = field(default_factory=dict)
    steps: int = 0

    @property
    def hit_frequency(self) -> float:
        return self.hits / self.trials

    def color_frequency(self, color: int) -> float:
        total = sum(self.color_counts.values())
        return self.color_counts.get(color, 0) / total if total else 0.0

    def to_json(self) -> dict:
        d = asdict(self)
        d["hit_frequency"] = self.hit_frequency
        d["color_counts"] = {str(k): v for k, v in sorted(self.color_counts.items())}
        d["exit_kinds"] = dict(sorted(self.exit_kinds.items()))
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"


def _check(horizon: int, trials: int) -> None:
    if horizon <= 0 or trials <= 0:
        raise ValueError("horizon and trials must be positive")


def trial_uniforms(seed: int, first: int, count: int, horizon: int) -> np.ndarray:
    """Uniforms for trials ``first .. first+count-1``, identical however trials are chunked."""
    bg = np.random.PCG64(seed)
    bg.advance(first * horizon)
    return np.random.Generator(bg).random((count, horizon))


def _cumprob(g: GameGraph) -> np.ndarray:
    out = []
    for s, row in enumerate(g.probs):
        if row is None:
            out.extend([0.0] * len(g.succ[s]))
        else:
            acc = 0.0
            for p in row:
                acc += p
                out.append(acc)
            out[-1] = 1.0
    return np.asarray(out, dtype=np.float64)


def _region_mask(g: GameGraph, r: Region | int | None, default: int) -> int:
    if r is None:
        return default
    return r.mask if isinstance(r, Region) else r


def simulate_explicit(
    g: GameGraph,
    start: int,
    strategies: Mapping[int, MemorylessStrategy | FiniteMemoryStrategy] | None = None,
    horizon: int = 100,
    trials: int = 1000,
    seed: int = 0,
    target: Region | None = None,
    region: Region | None = None,
    attractor: Region | None = None,
    stop_at_target: bool = False,
) -> PlayStats:
    """Plays from ``start``; players without a strategy (or without a choice) move uniformly."""
    _check(horizon, trials)
    strategies = dict(strategies or {})
    n = len(g)
    t_mask = _region_mask(g, target, 0)
    r_mask = _region_mask(g, region, g.full_mask)
    a_mask = _region_mask(g, attractor, 0)
    stats = PlayStats(trials=trials, horizon=horizon, seed=seed)
    ncolors = g.max_color + 1
    counts = np.zeros(ncolors, dtype=np.int64)
    if any(isinstance(s, FiniteMemoryStrategy) for s in strategies.values()):
        runner = _python_runner(g, start, strategies, t_mask, r_mask, a_mask, stop_at_target)
    else:
        choice = np.full(n, -1, dtype=np.int32)
        for strat in strategies.values():
            for s, t in strat.choice.items():
                choice[s] = t
        c = csr(g)
        args = (
            c.succ_ptr, c.succ_idx, _cumprob(g), c.owner_code, choice,
            np.asarray(g.colors, dtype=np.int32),
        )
        flags = [mask_to_flags(m, n) for m in (t_mask, r_mask, a_mask)]

        def runner(u):
            return kernels.simulate_plays(*args, u, start, flags[0], flags[1], flags[2], stop_at_target, ncolors)

    for first in range(0, trials, _CHUNK):
        count = min(_CHUNK, trials - first)
        hit, exit_, steps, visits, cc = runner(trial_uniforms(seed, first, count, horizon))
        stats.hits += int((hit >= 0).sum())
        stats.first_hit_steps.extend(int(h) for h in hit.tolist())
        stats.region_exits += int((exit_ >= 0).sum())
        stats.steps += int(steps.sum())
        stats.attractor_visits += int(visits.sum())
        stats.trials_visiting_attractor += int((visits > 0).sum())
        counts += cc.sum(axis=0)
    stats.color_counts = {c: int(v) for c, v in enumerate(counts.tolist()) if v}
    return stats


def _python_runner(g, start, strategies, t_mask, r_mask, a_mask, stop_at_target):
    """Per-step loop supporting finite-memory strategies; same uniform use as the kernel."""
    ncolors = g.max_color + 1

    def run(uniforms):
        trials, horizon = uniforms.shape
        hit = np.full(trials, -1, dtype=np.int64)
        ex = np.full(trials, -1, dtype=np.int64)
        steps = np.zeros(trials, dtype=np.int64)
        visits = np.zeros(trials, dtype=np.int64)
        counts = np.zeros((trials, ncolors), dtype=np.int64)
        for t in range(trials):
            u = uniforms[t].tolist()
            s = start
            mem = {p: (st.initial if isinstance(st, FiniteMemoryStrategy) else None) for p, st in strategies.items()}
            path = [s]
            h = 0 if (t_mask >> s) & 1 else -1
            e = -1 if (r_mask >> s) & 1 else 0
            if not (stop_at_target and h == 0):
                for i in range(horizon):
                    succ = g.succ[s]
                    o = g.owners[s]
                    if o is Owner.RANDOM:
                        row = g.probs[s]
                        acc, k = 0.0, 0
                        for k, p in enumerate(row):
                            acc += p
                            if u[i] < acc:
                                break
                        nxt = succ[k]
                    else:
                        st = strategies.get(o.player)
                        nxt = None
                        if isinstance(st, FiniteMemoryStrategy):
                            nxt = st.next(s, mem[o.player])
                        elif st is not None:
                            nxt = st.choice.get(s)
                        if nxt is None:
                            nxt = succ[min(int(u[i] * len(succ)), len(succ) - 1)]
                    for p, st in strategies.items():
                        if isinstance(st, FiniteMemoryStrategy) and (st.update_everywhere or o.player == p):
                            mem[p] = st.update(s, mem[p])
                    s = nxt
                    path.append(s)
                    if e < 0 and not (r_mask >> s) & 1:
                        e = i + 1
                    if h < 0 and (t_mask >> s) & 1:
                        h = i + 1
                        if stop_at_target:
                            break
            hit[t], ex[t], steps[t] = h, e, len(path) - 1
            visits[t] = sum((a_mask >> v) & 1 for v in path)
            for v in path[len(path) // 2 :]:
                counts[t, g.colors[v]] += 1
        return hit, ex, steps, visits, counts

    return run


# -- lossy channel games -----------------------------------------------------


def sample_loss(cfg: ConcreteConfig, lam: float, rng: np.random.Generator) -> ConcreteConfig:
    """Phase-0 step: each message is lost independently with probability ``lam``."""
    words = []
    for w in cfg.channels:
        if not w:
            words.append(w)
            continue
        lost = rng.random(len(w)) < lam
        words.append("".join(ch for ch, gone in zip(w, lost.tolist()) if not gone))
    return ConcreteConfig(cfg.ctrl, tuple(words), 1)


Chooser = Callable[[ConcreteConfig], ConcreteConfig | None]


def simulate_lcs(
    sys: LcsSystem,
    start: ConcreteConfig,
    strategies: Mapping[int, Chooser | FiniteMemoryStrategy] | None = None,
    horizon: int = 100,
    trials: int = 100,
    seed: int = 0,
    target: Callable[[ConcreteConfig], bool] | None = None,
    region: Callable[[ConcreteConfig], bool] | None = None,
    stop_at_target: bool = False,
    on_step: Callable[[int, ConcreteConfig, ConcreteConfig, str], None] | None = None,
) -> PlayStats:
    """Plays of the induced game.  ``target`` and ``region`` are membership predicates
    (a :class:`SymbolicRegion` works via its ``member`` method)."""
    _check(horizon, trials)
    strategies = dict(strategies or {})
    tgt = _predicate(target)
    reg = _predicate(region)
    stats = PlayStats(trials=trials, horizon=horizon, seed=seed)
    counts: dict[int, int] = {}
    for trial in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))
        cfg = start
        mem = {p: st.initial for p, st in strategies.items() if isinstance(st, FiniteMemoryStrategy)}
        path_colors = [sys.colors[cfg.ctrl]]
        hit = 0 if tgt is not None and tgt(cfg) else -1
        exited = reg is not None and not reg(cfg)
        last_visit = 0 if attractor_contains(cfg) else -1
        visits = 1 if attractor_contains(cfg) else 0
        if not (stop_at_target and hit == 0):
            for i in range(horizon):
                if cfg.phase == 0:
                    nxt, kind = sample_loss(cfg, sys.lam, rng), "loss"
                else:
                    p = sys.owners[cfg.ctrl]
                    options = [c for _, c in player_successors(sys, cfg)]
                    st = strategies.get(p)
                    nxt = None
                    if isinstance(st, FiniteMemoryStrategy):
                        nxt = st.next(cfg, mem[p])
                        mem[p] = st.update(cfg, mem[p])
                    elif st is not None:
                        nxt = st(cfg)
                    kind = "strategy" if nxt is not None else "random-policy"
                    if nxt is None:
                        nxt = options[int(rng.integers(len(options)))]
                    elif nxt not in options:
                        raise ValueError(f"strategy move {nxt} is not a successor")
                if on_step is not None:
                    on_step(i, cfg, nxt, kind)
                cfg = nxt
                path_colors.append(sys.colors[cfg.ctrl])
                if attractor_contains(cfg):
                    visits += 1
                    last_visit = i + 1
                if reg is not None and not exited and not reg(cfg):
                    exited = True
                    stats.exit_kinds[kind] = stats.exit_kinds.get(kind, 0) + 1
                if hit < 0 and tgt is not None and tgt(cfg):
                    hit = i + 1
                    if stop_at_target:
                        break
        stats.steps += len(path_colors) - 1
        stats.hits += hit >= 0
        stats.first_hit_steps.append(hit)
        stats.region_exits += exited
        stats.attractor_visits += visits
        stats.trials_visiting_attractor += visits > 0
        stats.last_attractor_visit.append(last_visit)
        for c in path_colors[len(path_colors) // 2 :]:
            counts[c] = counts.get(c, 0) + 1
    stats.color_counts = dict(sorted(counts.items()))
    stats.hits = int(stats.hits)
    stats.region_exits = int(stats.region_exits)
    stats.trials_visiting_attractor = int(stats.trials_visiting_attractor)
    return stats


def _predicate(p):
    if p is None:
        return None
    member = getattr(p, "member", None)
    return member if member is not None else p


def simulate(game_or_system, start, strategies=None, horizon=100, trials=100, seed=0, **kwargs) -> PlayStats:
    if isinstance(game_or_system, GameGraph):
        return simulate_explicit(game_or_system, start, strategies, horizon, trials, seed, **kwargs)
    return simulate_lcs(game_or_system, start, strategies, horizon, trials, seed, **kwargs)
