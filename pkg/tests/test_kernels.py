"""Every available backend must agree with the pure-Python one bit for bit."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lossyparity import kernels
from lossyparity.kernels import _pykernels
from lossyparity.oracle import _arrays
from lossyparity.reach import csr, mask_to_flags
from lossyparity.simulate import _cumprob, trial_uniforms

from conftest import games
from oracles import deletion_subset_count

BACKENDS = kernels.backends()
OTHERS = [b for b in BACKENDS if b is not _pykernels]


def test_active_backend_listed():
    assert kernels.BACKEND in {b.BACKEND for b in BACKENDS}
    assert _pykernels.BACKEND == "python"


def test_compiled_backend_built():
    # the extension is part of the install; a missing one should be noticed
    assert kernels.compiled_available() or kernels.BACKEND == "python"
    assert OTHERS, "compiled kernels not importable"


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("y, x", [("", ""), ("a", ""), ("abab", "ab"), ("aaaa", "aa"), ("abc", "d"), ("ab", "abc")])
def test_embedding_count_small(impl, y, x):
    assert impl.embedding_count(y, x) == deletion_subset_count(y, x)


@given(st.text("ab", max_size=10), st.text("ab", max_size=5))
def test_embedding_count_agrees(y, x):
    ref = deletion_subset_count(y, x)
    for impl in BACKENDS:
        assert impl.embedding_count(y, x) == ref


def test_embedding_count_long_words():
    y, x = "a" * 80, "a" * 3
    for impl in BACKENDS:
        assert impl.embedding_count(y, x) == 82160


@given(games(), st.integers(0, 1), st.integers(0, 63), st.integers(0, 63))
def test_force_layers_agree(g, x, tm, rm):
    n = len(g)
    c = csr(g)
    exist = (c.owner_code != (1 - x)).astype(np.uint8)
    args = (c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx, exist,
            mask_to_flags(tm & g.full_mask, n), mask_to_flags((rm | tm) & g.full_mask, n))
    ref = _pykernels.force_layers(*args)
    for impl in OTHERS:
        assert np.array_equal(impl.force_layers(*args), ref)


@given(games())
def test_classify_and_bscc_agree(g):
    ptr, idx, owner, colors = _arrays(g)
    ref = _pykernels.classify_profiles(ptr, idx, owner, colors)
    ref_b = _pykernels.bscc_flags(ptr, idx, colors)
    for impl in OTHERS:
        got = impl.classify_profiles(ptr, idx, owner, colors)
        assert all(np.array_equal(a, b) for a, b in zip(got, ref))
        assert np.array_equal(impl.bscc_flags(ptr, idx, colors), ref_b)


def test_bscc_flags_hand_example():
    # 0 -> {1, 2}; 1 loops with color 1; 2 loops with color 2
    ptr = np.array([0, 2, 3, 4], dtype=np.int32)
    idx = np.array([1, 2, 1, 2], dtype=np.int32)
    colors = np.array([0, 1, 2], dtype=np.int32)
    for impl in BACKENDS:
        assert impl.bscc_flags(ptr, idx, colors).tolist() == [3, 2, 1]


@given(games(), st.integers(0, 2**16), st.booleans())
def test_simulate_plays_agree(g, seed, stop):
    n = len(g)
    c = csr(g)
    choice = np.full(n, -1, dtype=np.int32)
    u = trial_uniforms(seed, 0, 16, 12)
    args = (c.succ_ptr, c.succ_idx, _cumprob(g), c.owner_code, choice, np.asarray(g.colors, dtype=np.int32),
            u, 0, mask_to_flags(1 << (n - 1), n), mask_to_flags(g.full_mask, n), mask_to_flags(1, n),
            stop, g.max_color + 1)
    ref = _pykernels.simulate_plays(*args)
    for impl in OTHERS:
        got = impl.simulate_plays(*args)
        assert all(np.array_equal(a, b) for a, b in zip(got, ref))
