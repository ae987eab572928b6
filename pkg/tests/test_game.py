import json

import pytest
from hypothesis import given, strategies as st

from lossyparity.game import (
    GameFormatError, InvalidGame, NotClosable, Owner, Region, check_valid, format_game,
    game_from_json, game_to_json, is_closable, is_sink_free, is_trap, load_game, make_game,
    parse_game, post, pre_exists, pre_forall, subgame, validate,
)

from conftest import games


def test_minimal_game_is_valid():
    g = make_game([("s", 0, 0)], {"s": ["s"]})
    assert validate(g) == []


def test_prob_sum_violation():
    g = make_game([("r", "R", 0), ("a", 0, 0), ("b", 0, 0)], {"a": ["a"], "b": ["b"]},
                  probs={("r", "a"): 0.5, ("r", "b"): 0.4})
    assert validate(g) == [("prob-sum", 0)]


def test_sink_violation():
    g = make_game([("a", 0, 0), ("b", 1, 0)], {"a": ["b"]})
    assert validate(g) == [("sink", 1)]
    with pytest.raises(InvalidGame):
        check_valid(g)


def test_color_range_violation():
    g = make_game([("a", 0, 3)], {"a": ["a"]}, rank=2)
    assert ("color-range", 0) in validate(g)


def chain():
    return make_game([("a", 0, 0), ("b", 1, 0), ("c", 0, 0)], {"a": ["b"], "b": ["c"], "c": ["c"]})


def test_pre_examples():
    g = chain()
    full, empty = Region.full(g), Region.empty(g)
    assert pre_forall(g, full) == full
    assert pre_exists(g, empty) == empty
    assert pre_exists(g, Region.of(g, ["c"])) == Region.of(g, ["b", "c"])
    # c is its own predecessor; without the self-loop only b remains
    g2 = make_game([("a", 0, 0), ("b", 1, 0), ("c", 0, 0)], {"a": ["b"], "b": ["c"], "c": ["a"]})
    assert pre_exists(g2, Region.of(g2, ["c"])) == Region.of(g2, ["b"])
    assert post(g, Region.of(g, ["a"])) == Region.of(g, ["b"])


def test_region_universe_mismatch():
    g, h = chain(), chain()
    with pytest.raises(ValueError):
        Region.full(g) | Region.full(h)


@given(games(), st.integers(0, 2**6 - 1), st.integers(0, 2**6 - 1))
def test_duality_and_monotonicity(g, m1, m2):
    q = Region(g, m1 & g.full_mask)
    q2 = Region(g, (m1 | m2) & g.full_mask)
    assert pre_forall(g, q) == ~pre_exists(g, ~q)
    assert pre_exists(g, q) <= pre_exists(g, q2)
    assert pre_forall(g, q) <= pre_forall(g, q2)


@given(games())
def test_whole_and_empty_regions_are_traps(g):
    for q in (Region.full(g), Region.empty(g)):
        assert is_sink_free(g, q) and is_closable(g, q)
        assert is_trap(g, 0, q) and is_trap(g, 1, q)


def test_random_state_leaving_is_not_closable():
    g = make_game([("r", "R", 0), ("a", 0, 0)], {"a": ["a"]}, probs={("r", "r"): 0.5, ("r", "a"): 0.5})
    assert not is_closable(g, Region.of(g, ["r"]))


@given(games())
def test_subgame_of_nothing_is_a_copy(g):
    sub, remap = subgame(g, Region.empty(g))
    assert remap == {i: i for i in range(len(g))}
    assert validate(sub) == []
    assert sub.same_as(g)


def test_subgame_all_removed():
    g = chain()
    with pytest.raises(NotClosable):
        subgame(g, Region.full(g))
    sub, remap = subgame(g, Region.full(g), allow_empty=True)
    assert len(sub) == 0 and remap == {}


def test_subgame_not_closable():
    g = chain()
    with pytest.raises(NotClosable, match="not-closable"):
        subgame(g, Region.of(g, ["c"]))


def test_subgame_keeps_probabilities():
    # removing the player-1 state p leaves r's row untouched since p is not r's successor
    g = make_game(
        [("r", "R", 0), ("a", 0, 1), ("p", 1, 0)],
        {"a": ["r"], "p": ["a", "p"]},
        probs={("r", "a"): 0.25, ("r", "r"): 0.75},
    )
    sub, remap = subgame(g, Region.of(g, ["p"]))
    assert validate(sub) == []
    assert sub.probs[remap[0]] == (0.25, 0.75)


@given(games())
def test_closable_subgames_validate(g):
    # every closable complement yields a valid subgame
    for m in range(1, 2 ** len(g)):
        keep = Region(g, m)
        if is_closable(g, keep):
            sub, _ = subgame(g, ~keep)
            assert validate(sub) == []


def test_parse_roundtrip(bundled_path):
    g = load_game(bundled_path("split.game"))
    assert g.names == ("r", "a", "b")
    assert parse_game(format_game(g)).same_as(g)
    assert game_from_json(json.loads(json.dumps(game_to_json(g)))).same_as(g)


def test_json_file(tmp_path, bundled_path):
    g = load_game(bundled_path("ladder4.game"))
    p = tmp_path / "g.json"
    p.write_text(json.dumps(game_to_json(g)))
    assert load_game(p).same_as(g)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("state a owner=0 color=0", 1, "before game header"),
        ("game rank=1\nstate a owner=2 color=0", 2, "bad owner"),
        ("game rank=1\nstate a owner=0 color=0\nedge a -> b", 3, "unknown state"),
        ("game rank=1\nstate r owner=R color=0\nedge r -> r", 3, "'prob'"),
        ("game rank=1\nstate a owner=0 color=0\nprob a -> a 1", 3, "non-random"),
        ("game rank=1\nstate a owner=0 color=0\nedge a -> a\nedge a -> a", 4, "duplicate edge"),
        ("game rank=1\nfoo", 2, "unknown directive"),
    ],
)
def test_parse_errors_are_positioned(text, line, fragment):
    with pytest.raises(GameFormatError) as exc:
        parse_game(text)
    assert exc.value.line == line
    assert fragment in str(exc.value)


def test_owner_helpers():
    assert Owner.of_player(1) is Owner.PLAYER1
    assert Owner.RANDOM.player is None
