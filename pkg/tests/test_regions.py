import zlib

import numpy as np
import pytest

from lossyparity.lcs import ConcreteConfig, all_configs, load_lcs, parse_lcs, player_successors
from lossyparity.regions import (
    SymbolicRegion, SymbolicUniverse, deadlock_set, is_closable, pre_exists_sym, pre_forall_sym,
    pre_loss, pre_recv, pre_send,
)
from lossyparity import automata as fa

from oracles import pointwise_pre_battery, random_regions, section_subword

EXAMPLES = ["prodcons.lcs", "sendloop.lcs", "gate.lcs", "relay.lcs"]


@pytest.fixture(params=EXAMPLES)
def universe(request, bundled_path):
    return SymbolicUniverse(load_lcs(bundled_path(request.param)))


def test_boolean_laws(universe):
    rng = np.random.default_rng(3)
    rs = random_regions(universe, rng, 8, 2)
    e = universe.empty()
    for r in rs:
        assert (r | e).equals(r)
        assert (r & ~r).is_empty()
        assert (~~r).equals(r)
        assert (r | r).equals(r) and (r & r).equals(r)
        for s in rs[:3]:
            assert (~(r | s)).equals(~r & ~s)
            assert (~(r & s)).equals(~r | ~s)
            assert (r & s) <= r <= (r | s)


def test_membership_of_literal_regions(universe):
    rng = np.random.default_rng(4)
    cfgs = list(all_configs(universe.sys, 2))
    for _ in range(5):
        pick = [cfgs[i] for i in rng.choice(len(cfgs), size=min(5, len(cfgs)), replace=False).tolist()]
        r = universe.from_configs(pick)
        for c in cfgs:
            assert r.member(c) == (c in pick)
        assert not universe.empty().member(pick[0])
        assert universe.full().member(pick[0])


def test_up_closure_region(universe):
    rng = np.random.default_rng(5)
    cfgs = list(all_configs(universe.sys, 2))
    for _ in range(5):
        pick = [cfgs[i] for i in rng.choice(len(cfgs), size=3, replace=False).tolist()]
        r = universe.from_configs(pick)
        up = r.up_closure()
        assert up.up_closure().equals(up) and r <= up
        for c in all_configs(universe.sys, 3):
            want = any(p.ctrl == c.ctrl and p.phase == c.phase and section_subword(p.channels, c.channels) for p in pick)
            assert up.member(c) == want
    assert universe.full().up_closure().equals(universe.full())
    assert universe.empty().up_closure().is_empty()


def test_shape_preserved(universe):
    rng = np.random.default_rng(6)
    shape = universe.shape
    for r in random_regions(universe, rng, 10, 2):
        for op in (r, ~r, pre_exists_sym(r), pre_forall_sym(r), pre_loss(r), r.up_closure()):
            for d in op.slots.values():
                assert fa.difference(d, shape).is_empty()


def test_pre_send_and_recv_examples(bundled_path):
    sys = load_lcs(bundled_path("gate.lcs"))
    u = SymbolicUniverse(sys)
    s, g = sys.state_index["s"], sys.state_index["g"]
    r = u.slot_region((g, 0), fa.words_dfa(u.alphabet, ["ab"]))
    assert pre_send(r, s, g, 0, "b").equals(u.from_literals(["s | c=a | phase=1"]))
    r = u.slot_region((g, 0), fa.words_dfa(u.alphabet, ["b"]))
    assert pre_recv(r, s, g, 0, "a").equals(u.from_literals(["s | c=ab | phase=1"]))


def test_trivial_pre_cases(universe):
    full, empty = universe.full(), universe.empty()
    assert pre_forall_sym(full, full).equals(full)
    assert pre_exists_sym(empty).is_empty()
    eps = universe.from_configs(
        ConcreteConfig(c, ("",) * universe.k, 1) for c in range(len(universe.sys.states))
    )
    assert pre_loss(eps).equals(full.only_slots(lambda s: s[1] == 0))
    assert is_closable(full)


def test_deadlock_examples():
    sys = parse_lcs(
        "lcs rank=0 lambda=0.5\nchannels c\nmessages a b\n"
        "state p player=0 color=0\nstate q player=0 color=0\n"
        "trans p -> q c?a\ntrans q -> q nop\n"
    )
    u = SymbolicUniverse(sys)
    d = deadlock_set(u)
    assert set(d.slots) == {(0, 1)}
    for w in ("", "a", "b", "aa", "ab", "ba", "bb"):
        cfg = ConcreteConfig(0, (w,), 1)
        fallback = player_successors(sys, cfg)[0][0] == -1
        assert d.member(cfg) == fallback == (not w.startswith("a"))


@pytest.mark.parametrize("name", EXAMPLES)
def test_pointwise_pre_battery(bundled_path, name):
    u = SymbolicUniverse(load_lcs(bundled_path(name)))
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    regions = random_regions(u, rng, 6, 2)
    checks, failures = pointwise_pre_battery(u, regions, 2)
    assert checks > 100
    assert failures == []


def test_pointwise_pre_battery_restricted(bundled_path):
    u = SymbolicUniverse(load_lcs(bundled_path("relay.lcs")))
    rng = np.random.default_rng(9)
    regions = random_regions(u, rng, 5, 2)
    restriction = ~u.from_literals(["z | | phase=1", "z | | phase=0"]).up_closure()
    checks, failures = pointwise_pre_battery(u, regions, 2, restriction)
    assert failures == []


def test_region_json_roundtrip(universe):
    rng = np.random.default_rng(8)
    for r in random_regions(universe, rng, 5, 2):
        assert SymbolicRegion.from_json(universe, r.to_json()).equals(r)
    with pytest.raises(ValueError):
        SymbolicRegion.from_json(universe, {"nowhere/1": universe.shape.to_json()})


def test_universe_mismatch(bundled_path):
    a = SymbolicUniverse(load_lcs(bundled_path("prodcons.lcs")))
    b = SymbolicUniverse(load_lcs(bundled_path("prodcons.lcs")))
    with pytest.raises(ValueError):
        a.full() | b.full()
