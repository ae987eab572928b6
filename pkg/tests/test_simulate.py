import json

import numpy as np
import pytest

from lossyparity.corpus import random_corpus
from lossyparity.game import MemorylessStrategy, Region, make_game
from lossyparity.lcs import ConcreteConfig, load_lcs
from lossyparity.oracle import FiniteMemoryStrategy
from lossyparity.simulate import sample_loss, simulate, simulate_explicit, simulate_lcs, trial_uniforms


def split():
    return make_game(
        [("r", "R", 0), ("a", 1, 1), ("b", 0, 2)], {"a": ["a"], "b": ["b"]},
        probs={("r", "a"): 0.25, ("r", "b"): 0.75},
    )


def test_color_zero_loop_frequency():
    g = make_game([("s", 0, 0), ("t", 0, 1)], {"s": ["s", "t"], "t": ["t"]})
    stats = simulate_explicit(g, 0, {0: MemorylessStrategy(0, {0: 0})}, horizon=50, trials=200, seed=3)
    assert stats.color_frequency(0) == 1.0


def test_bad_arguments():
    g = split()
    with pytest.raises(ValueError):
        simulate_explicit(g, 0, horizon=0)
    with pytest.raises(ValueError):
        simulate_explicit(g, 0, trials=-1)


def test_reproducible_and_seed_sensitive():
    g = split()
    a = simulate_explicit(g, 0, horizon=10, trials=500, seed=7, target=Region.of(g, ["b"]))
    b = simulate_explicit(g, 0, horizon=10, trials=500, seed=7, target=Region.of(g, ["b"]))
    c = simulate_explicit(g, 0, horizon=10, trials=500, seed=8, target=Region.of(g, ["b"]))
    assert a.dumps() == b.dumps()
    assert a.first_hit_steps != c.first_hit_steps
    assert json.loads(a.dumps())["rng"] == "PCG64"
    # a quarter of the plays go to a: binomial check at 6 sigma
    assert abs(a.hits - 375) < 6 * (500 * 0.75 * 0.25) ** 0.5


def test_trial_streams_do_not_depend_on_chunking():
    whole = trial_uniforms(11, 0, 10, 7)
    assert np.array_equal(trial_uniforms(11, 3, 4, 7), whole[3:7])
    g = random_corpus(1, seed=2)[0]
    big = simulate_explicit(g, 0, horizon=8, trials=5000, seed=5, target=Region.of(g, [len(g) - 1]))
    small = simulate_explicit(g, 0, horizon=8, trials=100, seed=5, target=Region.of(g, [len(g) - 1]))
    assert big.first_hit_steps[:100] == small.first_hit_steps


def test_finite_memory_path_matches_kernel_path():
    for g in random_corpus(20, seed=9):
        strat = MemorylessStrategy(0, {s: g.succ[s][-1] for s in range(len(g)) if g.owners[s].player == 0})
        kern = simulate_explicit(g, 0, {0: strat}, horizon=12, trials=300, seed=1, target=Region.of(g, [len(g) - 1]),
                                 attractor=Region.of(g, [0]))
        fm = FiniteMemoryStrategy.from_memoryless(strat, default=lambda s: g.succ[s][0])
        slow = simulate_explicit(g, 0, {0: fm}, horizon=12, trials=300, seed=1, target=Region.of(g, [len(g) - 1]),
                                 attractor=Region.of(g, [0]))
        assert kern.to_json() == slow.to_json()


def test_finite_memory_opponent_alternates():
    # player 1 alternates between two loops' entry points using one bit of memory
    g = make_game([("h", 1, 0), ("x", 0, 1), ("y", 0, 2)], {"h": ["x", "y"], "x": ["h"], "y": ["h"]})
    fm = FiniteMemoryStrategy.from_tables(
        1, 0, {(0, 0): 1, (0, 1): 2}, {(0, 0): 1, (0, 1): 0}
    )
    stats = simulate_explicit(g, 0, {1: fm}, horizon=40, trials=3, seed=0)
    # path h x h y ...: its trailing 21 states hold 11 h, 5 x, 5 y
    assert stats.color_counts == {0: 33, 1: 15, 2: 15}


def test_sample_loss_mm():
    rng = np.random.default_rng(123)
    lam = 0.4
    n = 20_000
    kept = sum(sample_loss(ConcreteConfig(0, ("mm",), 0), lam, rng).channels == ("mm",) for _ in range(n))
    p = (1 - lam) ** 2
    assert abs(kept / n - p) <= 3 * (p * (1 - p) / n) ** 0.5


def test_lcs_plays(bundled_path):
    sys = load_lcs(bundled_path("prodcons.lcs"))
    start = ConcreteConfig(0, ("",), 1)
    a = simulate_lcs(sys, start, horizon=50, trials=40, seed=3, target=lambda c: c.ctrl == 1)
    b = simulate(sys, start, horizon=50, trials=20, seed=3, target=lambda c: c.ctrl == 1)
    assert a.first_hit_steps[:20] == b.first_hit_steps
    assert a.hits == 40 and set(a.first_hit_steps) == {1}
    assert a.steps == 50 * 40
    assert len(a.last_attractor_visit) == 40


def test_lcs_rejects_illegal_moves(bundled_path):
    sys = load_lcs(bundled_path("prodcons.lcs"))
    with pytest.raises(ValueError):
        simulate_lcs(sys, ConcreteConfig(0, ("",), 1), {0: lambda c: ConcreteConfig(1, ("b",), 0)}, horizon=3, trials=1)


def test_lcs_step_log(bundled_path):
    sys = load_lcs(bundled_path("gate.lcs"))
    kinds = []
    simulate_lcs(sys, ConcreteConfig(0, ("",), 1), horizon=6, trials=1, seed=0,
                 on_step=lambda i, a, b, k: kinds.append((a.phase, k)))
    assert all((p == 0) == (k == "loss") for p, k in kinds)
