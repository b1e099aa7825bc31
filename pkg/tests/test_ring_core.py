import pytest

import oracles
from ringgather.ring_core import (
    Configuration,
    ConfigurationError,
    SymmetryKind,
    classify_symmetry,
    d_blocks,
    holes,
    inter_distance,
    is_gathered,
    is_periodic,
    is_protocol_valid,
    node_blocks,
    reflection_code,
    reflection_fixes,
    validate_instance,
)


def cfg(n, nodes):
    return Configuration.from_nodes(n, nodes)


# -- worked examples --------------------------------------------------------------

def test_holes_examples():
    hs = holes(cfg(10, [0, 1, 2, 5, 7]))
    assert [(h.start, h.size) for h in hs] == [(3, 2), (6, 1), (8, 2)]
    assert holes(cfg(5, range(5))) == []
    assert [(h.start, h.size) for h in holes(cfg(10, [0]))] == [(1, 9)]


def test_holes_empty_configuration():
    with pytest.raises(ConfigurationError, match="empty configuration"):
        holes(Configuration(4, (0, 0, 0, 0)))


def test_inter_distance_examples():
    assert inter_distance(cfg(10, [0, 1, 2, 5, 7])) == 1
    assert inter_distance(cfg(11, [0, 2, 4, 6, 8])) == 2
    assert inter_distance(cfg(6, [0, 3])) == 3
    with pytest.raises(ConfigurationError, match="undefined"):
        inter_distance(cfg(6, [2]))


def test_inter_distance_ignores_towers():
    assert inter_distance(cfg(10, [0, 0, 3, 6])) == 3


def test_d_blocks_examples():
    d, blocks, iso = d_blocks(cfg(10, [0, 1, 2, 5, 7]))
    assert (d, [b.members for b in blocks], iso) == (1, [(0, 1, 2)], [5, 7])
    d, blocks, iso = d_blocks(cfg(11, [0, 2, 4, 6, 8]))
    assert (d, [b.members for b in blocks], iso) == (2, [(0, 2, 4, 6, 8)], [])
    d, blocks, iso = d_blocks(cfg(16, [0, 1, 2, 5, 6, 7, 10, 11, 12]))
    assert [b.members for b in blocks] == [(0, 1, 2), (5, 6, 7), (10, 11, 12)]
    assert iso == []


def test_node_blocks_examples():
    assert [b.size for b in node_blocks(cfg(10, [0, 2, 4]))] == [1, 1, 1]
    assert [b.size for b in node_blocks(cfg(10, range(5)))] == [5]
    bs = node_blocks(cfg(12, [0, 2, 3, 4, 5, 7, 8]))
    assert [(b.start, b.size) for b in bs] == [(0, 1), (2, 4), (7, 2)]


def test_classify_symmetry_examples():
    assert classify_symmetry(cfg(10, [0, 2, 4, 6, 8])).kind == SymmetryKind.PERIODIC
    sym = classify_symmetry(cfg(10, [0, 1, 2, 5, 7]))
    assert sym.kind == SymmetryKind.SYMMETRIC
    assert sym.reflection % 10 == 2
    assert classify_symmetry(cfg(8, [0, 1, 3])).kind == SymmetryKind.RIGID


def test_reflection_code_encodes_axes():
    # even n: node axes are even codes, edge axes odd codes
    assert reflection_code(10, 2) == 2
    assert reflection_code(10, 3) == 3
    # odd n: every axis passes through a node, so the code is always even
    for t in range(7):
        c = reflection_code(7, t)
        assert c % 2 == 0 and 0 <= c < 14
        assert (c - t) % 7 == 0


def test_is_gathered_examples():
    occ = [0] * 10
    occ[4] = 5
    assert is_gathered(Configuration(10, tuple(occ)))
    assert not is_gathered(cfg(10, [0, 0, 0, 0, 1]))
    assert not is_gathered(cfg(10, [0, 1, 2, 5, 7]))


def test_validate_instance():
    validate_instance(10, 5)
    validate_instance(7, 3)
    for n, k in [(6, 3), (10, 4), (10, 7), (8, 1)]:
        with pytest.raises(ConfigurationError):
            validate_instance(n, k)


def test_protocol_validity():
    assert is_protocol_valid(cfg(10, [0, 1, 2, 5, 7]))
    assert not is_protocol_valid(cfg(10, [0, 0, 2, 5, 7]))


def test_text_form_round_trip():
    c = cfg(10, [0, 0, 3, 7])
    text = str(c)
    assert text == "n=10;occ=2,0,0,1,0,0,0,1,0,0"
    assert Configuration.parse(text) == c
    with pytest.raises(ConfigurationError):
        Configuration.parse("n=3;occ=1,2")
    with pytest.raises(ConfigurationError):
        Configuration.parse("garbage")


def test_rotate_and_reflect():
    c = cfg(10, [0, 1, 5])
    assert c.rotate(3).occupied == (3, 4, 8)
    assert c.reflect(2).occupied == (1, 2, 7)


# -- exhaustive oracle agreement (n <= 12) ------------------------------------------

def test_exhaustive_against_oracles():
    checked = 0
    for pattern in oracles.all_patterns(12):
        n = len(pattern)
        c = Configuration(n, tuple(int(p) for p in pattern))
        assert [(h.start, h.size) for h in holes(c)] == oracles.holes(pattern)
        assert sorted((b.start, b.size) for b in node_blocks(c)) == oracles.node_blocks(pattern)
        if sum(pattern) >= 2:
            d, blocks, iso = d_blocks(c)
            assert (d, sorted(b.members for b in blocks), iso) == oracles.d_blocks(pattern)
        kind, fix = oracles.symmetry(pattern)
        sym = classify_symmetry(c)
        assert sym.kind == kind
        if kind == "symmetric":
            assert len(fix) == 1  # a non-periodic pattern has a single axis
            assert sym.reflection % n in fix
            assert 0 <= sym.reflection < 2 * n
        checked += 1
    assert checked == sum(2 ** n - 1 for n in range(1, 13))


def test_structural_invariants_exhaustive():
    for pattern in oracles.all_patterns(12, min_n=2):
        n = len(pattern)
        if all(pattern):
            continue
        c = Configuration(n, tuple(int(p) for p in pattern))
        hs, bs = holes(c), node_blocks(c)
        assert len(hs) == len(bs)
        assert sum(h.size for h in hs) + sum(b.size for b in bs) == n
        if sum(pattern) >= 2:
            _, blocks, iso = d_blocks(c)
            assert len(iso) + sum(b.size for b in blocks) == sum(pattern)
            if len(blocks) == 1 and not iso and blocks[0].size % 2 == 1 and not is_periodic(pattern):
                sym = classify_symmetry(c)
                assert sym.kind == SymmetryKind.SYMMETRIC
                middle = blocks[0].members[blocks[0].size // 2]
                assert (sym.reflection - middle) % n == middle  # axis through the middle robot


def test_reflection_fixes_matches_definition():
    pattern = cfg(10, [0, 1, 2, 5, 7]).pattern
    assert reflection_fixes(pattern, 2)
    assert reflection_fixes(pattern, 12)
    assert not reflection_fixes(pattern, 3)
