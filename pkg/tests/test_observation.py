import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from ringgather.observation import (
    View,
    compare_views,
    direction_sequence,
    max_view_nodes,
    view_at,
    view_ranks,
)
from ringgather.ring_core import Configuration, ConfigurationError, classify_symmetry, SymmetryKind


def cfg(n, nodes):
    return Configuration.from_nodes(n, nodes)


def test_view_examples():
    c = cfg(10, [0, 1, 2, 5, 7])
    assert view_at(c, 5) == View((3, 1, 1, 3, 2), False, False)
    v1 = view_at(c, 1)
    assert v1.sequence == (1, 3, 2, 3, 1) and v1.symmetric
    v = view_at(cfg(6, [0, 3]), 0)
    assert v.sequence == (3, 3) and v.symmetric


def test_view_multiplicity_bit():
    c = cfg(10, [0, 0, 1, 2])
    assert view_at(c, 0).multiplicity
    assert not view_at(c, 1).multiplicity


def test_view_on_empty_node():
    with pytest.raises(ConfigurationError, match="no robot here"):
        view_at(cfg(10, [0, 1]), 4)


def test_compare_views_examples():
    def v(seq):
        return View(tuple(seq), False, False)
    assert compare_views(v((3, 1, 1, 3, 2)), v((1, 3, 2, 3, 1))) == 1
    assert compare_views(v((2, 2, 2)), v((2, 2, 2))) == 0
    assert compare_views(v((2, 3, 1)), v((2, 3, 2))) == -1
    assert compare_views(View((1, 2), True, False), View((1, 2), False, False)) == 0
    with pytest.raises(ConfigurationError, match="incomparable"):
        compare_views(v((1, 2)), v((1, 2, 3)))


def test_max_view_nodes_examples():
    c = cfg(10, [0, 1, 2, 5, 7])
    assert max_view_nodes(c, {5, 7}) == {5, 7}
    rigid = cfg(8, [0, 1, 3])
    best = max_view_nodes(rigid, {0, 1, 3})
    assert len(best) == 1
    brute = max((oracles.view(rigid.pattern, v)[0], v) for v in (0, 1, 3))[1]
    assert best == {brute}
    assert max_view_nodes(c, {2}) == {2}
    with pytest.raises(ConfigurationError):
        max_view_nodes(c, set())


def test_view_ranks_are_descending():
    c = cfg(12, [0, 1, 3, 4, 8])
    ranks = view_ranks(c, c.occupied)
    seqs = [view_at(c, next(iter(g))).sequence for g in ranks]
    assert seqs == sorted(seqs, reverse=True)
    assert sum(len(g) for g in ranks) == 5


def test_views_and_lemma1_exhaustive():
    """Views agree with the walk oracle, and rigid or symmetric patterns
    have (at most pairwise) distinct views, for every pattern with n <= 12."""
    for pattern in oracles.all_patterns(12):
        n = len(pattern)
        c = Configuration(n, tuple(int(p) for p in pattern))
        views = {}
        for v in c.occupied:
            got = view_at(c, v)
            seq, sym = oracles.view(pattern, v)
            assert (got.sequence, got.symmetric) == (seq, sym)
            assert sum(got.sequence) == n
            assert len(got.sequence) == len(c.occupied)
            views.setdefault(got.sequence, []).append(v)
        kind = classify_symmetry(c).kind
        if kind == SymmetryKind.RIGID:
            assert all(len(g) == 1 for g in views.values())
        elif kind == SymmetryKind.SYMMETRIC:
            assert all(len(g) <= 2 for g in views.values())


@st.composite
def configs(draw):
    n = draw(st.integers(3, 20))
    nodes = draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=n))
    return cfg(n, nodes)


@settings(max_examples=200, deadline=None)
@given(configs(), st.integers(0, 40))
def test_rotation_invariance(c, r):
    rc = c.rotate(r)
    for v in c.occupied:
        assert view_at(rc, (v + r) % c.n) == view_at(c, v)


@settings(max_examples=200, deadline=None)
@given(configs(), st.integers(0, 40))
def test_reflection_covariance(c, t):
    rc = c.reflect(t)
    for v in c.occupied:
        a, b = view_at(rc, (t - v) % c.n), view_at(c, v)
        assert a == b
        # reflection swaps the two direction sequences
        assert direction_sequence(rc, (t - v) % c.n, 1) == direction_sequence(c, v, -1)
