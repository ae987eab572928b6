"""Time each hot kernel under the pure-Python and compiled backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Inputs are generated with fixed seeds, and every backend's result is checked
against the pure-Python one before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lossyparity import kernels
from lossyparity.corpus import random_corpus, random_game
from lossyparity.oracle import _arrays
from lossyparity.reach import csr, mask_to_flags
from lossyparity.simulate import _cumprob, trial_uniforms


def force_case():
    rng = np.random.default_rng(0)
    g = random_game(rng, max_states=60, max_outdegree=3)
    while len(g) < 40:
        g = random_game(rng, max_states=60, max_outdegree=3)
    c = csr(g)
    n = len(g)
    exist = (c.owner_code != 1).astype(np.uint8)
    args = (c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx, exist, mask_to_flags(1, n), mask_to_flags(g.full_mask, n))
    return f"force_layers ({n} states) x200", lambda k: [k.force_layers(*args) for _ in range(200)]


def classify_case():
    games = [_arrays(g) for g in random_corpus(200, seed=1)]
    return "classify_profiles (200 games)", lambda k: [k.classify_profiles(*a) for a in games]


def embedding_case():
    rng = np.random.default_rng(2)
    pairs = [("".join(rng.choice(list("ab"), 12)), "".join(rng.choice(list("ab"), 4))) for _ in range(2000)]
    return "embedding_count (2000 pairs)", lambda k: [k.embedding_count(y, x) for y, x in pairs]


def simulate_case():
    g = random_corpus(1, seed=3, max_states=6)[0]
    n = len(g)
    c = csr(g)
    u = trial_uniforms(4, 0, 4096, 60)
    args = (c.succ_ptr, c.succ_idx, _cumprob(g), c.owner_code, np.full(n, -1, dtype=np.int32),
            np.asarray(g.colors, dtype=np.int32), u, 0, mask_to_flags(0, n), mask_to_flags(g.full_mask, n),
            mask_to_flags(1, n), False, g.max_color + 1)
    return "simulate_plays (4096 x 60 steps)", lambda k: k.simulate_plays(*args)


def _same(a, b) -> bool:
    if isinstance(a, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.backends()
    names = [b.BACKEND for b in backends]
    print(f"{'kernel':36}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}")
    for make in (force_case, classify_case, embedding_case, simulate_case):
        label, run = make()
        ref = run(backends[0])
        times = []
        for b in backends:
            if not _same(run(b), ref):
                raise SystemExit(f"{label}: backend {b.BACKEND} disagrees with python")
            best = min(_timed(run, b) for _ in range(args.repeat))
            times.append(best)
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else "      n/a"
        print(f"{label:36}" + "".join(f"{t * 1e3:10.1f}ms" for t in times) + speed)


def _timed(run, backend) -> float:
    t0 = time.perf_counter()
    run(backend)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
