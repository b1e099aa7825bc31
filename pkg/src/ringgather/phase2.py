"""Second phase: recognise the special set C_sp and collapse it into a tower.

Recognition only looks at the occupied/empty pattern. Robots never see
remote towers, so a class match says nothing about where towers are.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from .phase1 import MoveIntent, ProtocolError
from .ring_core import Configuration, NodeBlock

SINGLE_BLOCK = "sb"
BLOCK_LEADER = "bl"
SEMI_SINGLE_BLOCK = "ssb"
SEMI_TWIN = "st"
SEMI_BLOCK_LEADER = "sbl"

VARIANTS = (SINGLE_BLOCK, BLOCK_LEADER, SEMI_SINGLE_BLOCK, SEMI_TWIN, SEMI_BLOCK_LEADER)


@dataclass(frozen=True)
class CspClass:
    variant: str
    params: tuple[int, ...]
    roles: dict[str, NodeBlock] = field(compare=False, hash=False)
    v_t: int | None
    # (node, target) pairs; SingleBlock{2} leaves this empty because its
    # mover is picked by the local multiplicity bit
    movers: tuple[tuple[int, int], ...]

    @property
    def label(self) -> str:
        return f"C_{self.variant}(" + ",".join(str(p) for p in self.params) + ")"

    def __str__(self) -> str:
        return self.label


def _block_holes(pattern: Sequence[bool], blocks: list[NodeBlock]) -> list[int]:
    """Size of the hole following each block clockwise."""
    n = len(pattern)
    out = []
    for i, b in enumerate(blocks):
        nxt = blocks[(i + 1) % len(blocks)]
        out.append((nxt.start - b.end(n) - 1) % n)
    return out


def _node_blocks(pattern: Sequence[bool]) -> list[NodeBlock]:
    n = len(pattern)
    out = []
    for i in range(n):
        if pattern[i] and not pattern[i - 1]:
            size = 0
            while pattern[(i + size) % n]:
                size += 1
            out.append(NodeBlock(i, size))
    return out


def _two_block_candidates(n, blocks, gaps):
    found = []
    a, b = blocks
    # (B1, B2, shared hole lies after B1 clockwise?)
    layouts = []
    if gaps[0] == 1:
        layouts += [(a, b, True), (b, a, False)]
    if gaps[1] == 1:
        layouts += [(b, a, True), (a, b, False)]
    for b1, b2, after_b1 in layouts:
        hole = (b1.end(n) + 1) % n if after_b1 else (b1.start - 1) % n
        roles = {"B1": b1, "B2": b2}
        if b2.size == 1 and b1.size % 2 == 0:
            half = b1.size // 2
            v_t = (b1.end(n) - (half - 1)) % n if after_b1 else (b1.start + half - 1) % n
            found.append(CspClass(SEMI_SINGLE_BLOCK, (b1.size,), roles, v_t,
                                  ((b2.start, hole),)))
        if b2.size == b1.size + 2:
            if after_b1:
                v_t, inner = b2.start, (b2.start + 1) % n
            else:
                v_t, inner = b2.end(n), (b2.end(n) - 1) % n
            found.append(CspClass(SEMI_TWIN, (b1.size,), roles, v_t, ((inner, v_t),)))
    return found


def _three_block_candidates(n, blocks, gaps):
    found = []
    for i in range(3):
        b0 = blocks[i]
        prev, nxt = blocks[i - 1], blocks[(i + 1) % 3]
        if gaps[i - 1] != 1 or gaps[i] != 1:
            continue
        into_prev = (prev.end(n), (prev.end(n) + 1) % n)
        into_next = (nxt.start, (nxt.start - 1) % n)
        if b0.size % 2 == 1 and prev.size == nxt.size:
            v_t = (b0.start + b0.size // 2) % n
            roles = {"B0": b0, "B1": prev, "B2": nxt}
            found.append(CspClass(BLOCK_LEADER, (b0.size, prev.size), roles, v_t,
                                  tuple(sorted((into_prev, into_next)))))
        if b0.size % 2 == 0:
            half = b0.size // 2
            if nxt.size == prev.size + 1:
                v_t = (b0.end(n) - (half - 1)) % n
                roles = {"B0": b0, "B1": prev, "B2": nxt}
                found.append(CspClass(SEMI_BLOCK_LEADER, (b0.size, prev.size), roles, v_t,
                                      (into_next,)))
            if prev.size == nxt.size + 1:
                v_t = (b0.start + half - 1) % n
                roles = {"B0": b0, "B1": nxt, "B2": prev}
                found.append(CspClass(SEMI_BLOCK_LEADER, (b0.size, nxt.size), roles, v_t,
                                      (into_prev,)))
    return found


def classify_pattern(pattern: Sequence[bool]) -> CspClass | None:
    return _classify(tuple(bool(p) for p in pattern))


@lru_cache(maxsize=1 << 16)
def _classify(pattern: tuple[bool, ...]) -> CspClass | None:
    n = len(pattern)
    if all(pattern) or not any(pattern):
        return None
    blocks = _node_blocks(pattern)
    if len(blocks) == 1:
        b = blocks[0]
        if b.size % 2 == 1:
            c = (b.start + b.size // 2) % n
            movers = () if b.size == 1 else tuple(sorted(
                (((c - 1) % n, c), ((c + 1) % n, c))))
            return CspClass(SINGLE_BLOCK, (b.size,), {"B0": b}, c, movers)
        if b.size == 2:
            return CspClass(SINGLE_BLOCK, (2,), {"B0": b}, None, ())
        return None
    gaps = _block_holes(pattern, blocks)
    if len(blocks) == 2:
        found = _two_block_candidates(n, blocks, gaps)
    elif len(blocks) == 3:
        found = _three_block_candidates(n, blocks, gaps)
    else:
        return None
    if not found:
        return None
    # every admissible role assignment must lead to the same behaviour
    first = found[0]
    if any((c.variant, c.params, c.v_t, set(c.movers)) !=
           (first.variant, first.params, first.v_t, set(first.movers)) for c in found[1:]):
        return None
    return first


def classify_csp(config: Configuration) -> CspClass | None:
    return classify_pattern(config.pattern)


def phase2_moves(config: Configuration, cls: CspClass) -> frozenset[MoveIntent]:
    if classify_csp(config) != cls:
        raise ProtocolError("stale classification")
    if cls.variant == SINGLE_BLOCK and cls.params == (2,):
        a = cls.roles["B0"].start
        b = (a + 1) % config.n
        moves = set()
        # only a robot that is alone on its node moves onto the other node
        if config.occupancy[a] == 1:
            moves.add(MoveIntent(a, (b,)))
        if config.occupancy[b] == 1:
            moves.add(MoveIntent(b, (a,)))
        return frozenset(moves)
    return frozenset(MoveIntent(v, (t,)) for v, t in cls.movers)
