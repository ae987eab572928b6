import json

import numpy as np
import pytest

from lossyparity.automata import AutomatonCapExceeded
from lossyparity.game import Region
from lossyparity.lcs import ConcreteConfig, all_configs, expand_bounded, load_lcs, parse_lcs, player_successors
from lossyparity.oracle import classify
from lossyparity.reach import force_set
from lossyparity.regions import SymbolicUniverse
from lossyparity.scheme import CNode, DNode, TerminationCap
from lossyparity.simulate import simulate_lcs
from lossyparity.symbolic import (
    NotClosable, NotWinningHere, WrongPhase, all_nodes, force_step, read_bundle, strategy_step, sym_cn,
    sym_dn, sym_force, sym_solve, write_bundle,
)

EXAMPLES = ["prodcons.lcs", "sendloop.lcs", "gate.lcs", "relay.lcs"]


def lcs_text(states, trans, rank=1, channels="c", messages="a"):
    head = f"lcs rank={rank} lambda=0.5\nchannels {channels}\nmessages {messages}\n"
    return head + "".join(f"state {s}\n" for s in states) + "".join(f"trans {t}\n" for t in trans)


@pytest.fixture(scope="module")
def solved(request):
    from conftest import bundled

    return {name: sym_solve(load_lcs(bundled(name))) for name in EXAMPLES}


def test_force_trivial_targets(bundled_path):
    u = SymbolicUniverse(load_lcs(bundled_path("gate.lcs")))
    full = sym_force(u, 0, u.full())
    assert full.force.equals(u.full()) and full.iterations == 0
    assert sym_force(u, 1, u.empty()).force.is_empty()


def test_force_sendloop_against_bounded_expansion(bundled_path):
    sys = load_lcs(bundled_path("sendloop.lcs"))
    u = SymbolicUniverse(sys)
    q1 = sys.state_index["q1"]
    cert = sym_force(u, 0, u.slot_region((q1, 1)))
    start = ConcreteConfig(sys.state_index["q0"], ("",), 1)
    assert cert.force.member(start)
    e = expand_bounded(sys, 2)
    tgt = Region(e.game, sum(1 << i for i, c in enumerate(e.configs) if c.ctrl == q1 and c.phase == 1))
    explicit = force_set(e.game, 0, tgt).force
    assert e.ids[start] in explicit
    for c in all_configs(sys, 1):
        assert cert.force.member(c) == (e.ids[c] in explicit)


def test_force_restriction_must_be_closable(bundled_path):
    sys = load_lcs(bundled_path("prodcons.lcs"))
    u = SymbolicUniverse(sys)
    # phase-0 configs whose losses can leave: keep only (q0, c=a) random
    r = u.from_literals(["q0 | c=a | phase=0"])
    with pytest.raises(NotClosable):
        sym_force(u, 0, u.empty(), r)


def _force_certs(res):
    for node in all_nodes(res.root_c, res.root_d):
        if isinstance(node, CNode):
            yield from node.X
            yield from node.Z
        elif isinstance(node, DNode):
            yield from node.U


@pytest.mark.parametrize("name", EXAMPLES)
def test_fixpoint_equation_and_monotone_layers(solved, name):
    res = solved[name]
    certs = list(_force_certs(res))
    assert certs
    for cert in certs:
        assert force_step(cert.force, cert.player, cert.restriction).equals(cert.force)
        for a, b in zip(cert.layers, cert.layers[1:]):
            assert a <= b and not a.equals(b)
        # random slots of every layer, minus the target, are upward closed inside the arena
        q = (cert.restriction - cert.target).only_slots(lambda s: s[1] == 0)
        for layer in cert.layers:
            x = (layer - cert.target).only_slots(lambda s: s[1] == 0)
            assert (x.up_closure() & q).equals(x)
    m = res.metrics
    assert m["force_calls"] > 0 and m["sequence_iterations_max"] >= 1


@pytest.mark.parametrize("name", EXAMPLES)
def test_partition(solved, name):
    res = solved[name]
    a, b, c = res.as_winner0, res.as_winner1, res.both_wpp
    assert (a | b | c).equals(res.universe.full())
    assert (a & b).is_empty() and (a & c).is_empty() and (b & c).is_empty()


def test_rank_zero_system():
    sys = parse_lcs(lcs_text(["q player=0 color=0", "r player=1 color=0"], ["q -> r c!a", "r -> q c?a"], rank=0))
    u = SymbolicUniverse(sys)
    c, _ = sym_cn(sys, 0)
    d, _ = sym_dn(sys, 0)
    assert c.key == d.key == u.full().key
    res = sym_solve(sys)
    assert res.as_winner0.equals(res.universe.full())


def test_color_one_only_system():
    sys = parse_lcs(lcs_text(["q player=0 color=1"], ["q -> q nop"]))
    res = sym_solve(sys)
    assert res.as_winner1.equals(res.universe.full())
    # the k=0 expansion is exact: channels never fill
    e = expand_bounded(sys, 0)
    assert classify(e.game).as_region(1) == Region.full(e.game)


def test_prodcons_verdict(solved, bundled_path):
    sys = load_lcs(bundled_path("prodcons.lcs"))
    res = solved["prodcons.lcs"]
    start = ConcreteConfig(0, ("",), 1)
    # player 1 refuses nothing: odd color 1 at q1 is seen forever
    assert res.as_winner1.member(start)
    assert res.as_winner1.equals(res.universe.full())
    e = expand_bounded(sys, 2)
    assert classify(e.game).of(1, e.ids[start]) == "almost-sure"


def test_strategy_step_errors(solved):
    res = solved["relay.lcs"]
    with pytest.raises(WrongPhase, match="wrong-phase"):
        strategy_step(res, ConcreteConfig(0, ("", ""), 0))
    # player 0 owns an odd loop and loses everywhere
    lost = sym_solve(parse_lcs(lcs_text(["q player=0 color=1"], ["q -> q nop"])))
    with pytest.raises(NotWinningHere, match="not-winning-here"):
        strategy_step(lost, ConcreteConfig(0, ("",), 1))


def test_strategy_step_unique_successor(solved):
    res = solved["relay.lcs"]
    sys = res.system
    cfg = ConcreteConfig(sys.state_index["z"], ("", ""), 1)
    assert strategy_step(res, cfg) == player_successors(sys, cfg)[0][1]


@pytest.mark.parametrize("name", EXAMPLES)
def test_strategy_step_moves_are_successors(solved, name):
    res = solved[name]
    sys = res.system
    for c in all_configs(sys, 2):
        if c.phase != 1:
            continue
        p = sys.owners[c.ctrl]
        if res.as_winner(p).member(c) or res.both_wpp.member(c):
            nxt = strategy_step(res, c)
            assert nxt in [s for _, s in player_successors(sys, c)]
            assert strategy_step(res, c) == nxt


def test_prodcons_strategy_plays(solved):
    res = solved["prodcons.lcs"]
    win = res.as_winner1
    stats = simulate_lcs(
        res.system, ConcreteConfig(0, ("",), 1), {1: lambda c: strategy_step(res, c)},
        horizon=20, trials=1000, seed=2, region=win,
    )
    assert stats.region_exits == 0 and stats.steps == 20 * 1000


@pytest.mark.parametrize("name", EXAMPLES)
def test_almost_sure_regions_closed_under_play(solved, name):
    res = solved[name]
    sys = res.system
    for p in (0, 1):
        region = res.as_winner(p)
        starts = [c for c in all_configs(sys, 1) if region.member(c)][:4]
        for i, start in enumerate(starts):
            stats = simulate_lcs(
                sys, start, {p: lambda c: strategy_step(res, c)}, horizon=30, trials=100,
                seed=i, region=region,
            )
            assert stats.region_exits == 0, (p, start, stats.exit_kinds)


@pytest.mark.parametrize("name", EXAMPLES)
def test_empty_channel_recurrence(name, bundled_path):
    sys = load_lcs(bundled_path(name))
    start = ConcreteConfig(0, ("",) * len(sys.channels), 1)
    horizon = 5000
    stats = simulate_lcs(sys, start, horizon=horizon, trials=3, seed=4)
    rng = np.random.default_rng(1)
    for last in stats.last_attractor_visit:
        for i in rng.integers(0, horizon - 100, size=20).tolist():
            assert last >= i


@pytest.mark.parametrize("name", EXAMPLES)
def test_bundle_roundtrip(solved, name, tmp_path):
    res = solved[name]
    files = write_bundle(res, tmp_path, {"source": name})
    for f in files:
        assert (tmp_path / f).exists()
    back = read_bundle(tmp_path)
    for reg in ("as_winner0", "as_winner1", "both_wpp"):
        assert back.region(reg).key == res.region(reg).key
    sys = res.system
    for c in all_configs(sys, 1):
        if c.phase != 1:
            continue
        try:
            want = strategy_step(res, c)
        except NotWinningHere:
            with pytest.raises(NotWinningHere):
                strategy_step(back, c)
            continue
        assert strategy_step(back, c) == want


def test_corrupted_bundle_rejected(solved, tmp_path):
    res = solved["relay.lcs"]
    write_bundle(res, tmp_path)
    p = tmp_path / "as_winner0.json"
    p.write_text("{}")
    with pytest.raises(ValueError, match="inconsistent"):
        read_bundle(tmp_path)
    p.write_text(json.dumps({"slots": {}}))
    with pytest.raises(ValueError, match="bad slot"):
        read_bundle(tmp_path)


def test_caps(bundled_path):
    sys = load_lcs(bundled_path("relay.lcs"))
    with pytest.raises(TerminationCap, match="termination-cap"):
        sym_solve(sys, iteration_cap=0)
    with pytest.raises(AutomatonCapExceeded, match="cap-exceeded"):
        sym_solve(sys, state_cap=3)
