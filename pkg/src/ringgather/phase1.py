"""First phase: grow a single 1.block from a tower-free configuration."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .observation import direction_sequence, view_ranks
from .ring_core import Configuration, DBlock, d_blocks


class ProtocolError(RuntimeError):
    """The protocol reached a situation its rules do not cover."""


class Phase1Class(enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3A = "type3a"
    TYPE3B = "type3b"


@dataclass(frozen=True)
class MoveIntent:
    """A robot's decision. One target is a plain move; two targets mean the
    robot's view is symmetric and the scheduler picks the direction."""

    robot: int
    targets: tuple[int, ...]

    @property
    def is_choice(self) -> bool:
        return len(self.targets) == 2

    def __str__(self) -> str:
        if self.is_choice:
            return f"{self.robot}->{{{self.targets[0]}|{self.targets[1]}}}"
        return f"{self.robot}->{self.targets[0]}"


class _Structure:
    """d.block bookkeeping shared by the classification and the move rules."""

    def __init__(self, config: Configuration):
        self.config = config
        self.n = config.n
        self.d, self.blocks, self.isolated = d_blocks(config)
        self.block_of: dict[int, DBlock] = {}
        for b in self.blocks:
            for v in b.members:
                self.block_of[v] = b
        self.biggest_size = max(b.size for b in self.blocks)
        self.biggest = [b for b in self.blocks if b.size == self.biggest_size]

    def in_biggest(self, node: int) -> bool:
        b = self.block_of.get(node)
        return b is not None and b.size == self.biggest_size

    def neighbor(self, node: int, step: int) -> tuple[int, int]:
        """Next occupied node from ``node`` in direction ``step`` and its distance."""
        pattern = self.config.pattern
        cur, dist = node, 0
        while True:
            cur = (cur + step) % self.n
            dist += 1
            if pattern[cur]:
                return cur, dist

    def toward_biggest(self, node: int) -> dict[int, int]:
        """Directions in which the adjacent occupied node lies in a biggest
        d.block across a separating hole, mapped to the segment length."""
        out = {}
        for step in (1, -1):
            nb, dist = self.neighbor(node, step)
            if dist > self.d and self.in_biggest(nb):
                out[step] = dist
        return out


def classify_phase1(config: Configuration) -> Phase1Class:
    if config.towers:
        raise ProtocolError("phase-1 precondition violated")
    return _classify(_Structure(config))


def _classify(st: _Structure) -> Phase1Class:
    if len(st.blocks) == 1 and not st.isolated and st.d > 1:
        return Phase1Class.TYPE1
    if not st.isolated and len({b.size for b in st.blocks}) == 1:
        return Phase1Class.TYPE2
    if any(st.toward_biggest(v) for v in st.isolated):
        return Phase1Class.TYPE3A
    return Phase1Class.TYPE3B


def _step_toward(config: Configuration, node: int, steps: list[int]) -> MoveIntent:
    n = config.n
    if len(steps) == 1:
        return MoveIntent(node, ((node + steps[0]) % n,))
    # equidistant on both sides: the view decides, or the scheduler does
    cw = direction_sequence(config, node, +1)
    ccw = direction_sequence(config, node, -1)
    if cw == ccw:
        return MoveIntent(node, ((node - 1) % n, (node + 1) % n))
    step = 1 if cw > ccw else -1
    return MoveIntent(node, ((node + step) % n,))


def phase1_moves(config: Configuration) -> frozenset[MoveIntent]:
    if config.towers:
        raise ProtocolError("phase-1 precondition violated")
    st = _Structure(config)
    cls = _classify(st)
    n = config.n

    if cls is Phase1Class.TYPE1:
        m = st.blocks[0].members
        c = len(m) // 2
        moves = {MoveIntent(m[c - 1], ((m[c - 1] + 1) % n,)),
                 MoveIntent(m[c + 1], ((m[c + 1] - 1) % n,))}

    elif cls is Phase1Class.TYPE2:
        # border robot -> (step into its separating hole, id of that hole)
        facing: dict[int, tuple[int, frozenset[int]]] = {}
        for b in st.blocks:
            first, last = b.borders
            facing[first] = (-1, frozenset((first, st.neighbor(first, -1)[0])))
            facing[last] = (1, frozenset((last, st.neighbor(last, 1)[0])))
        chosen: set[int] = set()
        for group in view_ranks(config, facing):
            hole_ids = [facing[v][1] for v in group]
            if len(set(hole_ids)) < len(hole_ids):
                continue  # face-to-face on the axis hole: withdraw
            chosen = group
            break
        if not chosen:
            raise ProtocolError("type-2 exception exhausted every view rank")
        moves = {MoveIntent(v, ((v + facing[v][0]) % n,)) for v in chosen}

    elif cls is Phase1Class.TYPE3A:
        reach = {v: st.toward_biggest(v) for v in st.isolated}
        reach = {v: r for v, r in reach.items() if r}
        nearest = {v: min(r.values()) for v, r in reach.items()}
        best = min(nearest.values())
        cands = [v for v in reach if nearest[v] == best]
        winners = view_ranks(config, cands)[0]
        moves = set()
        for v in winners:
            steps = sorted(s for s, dist in reach[v].items() if dist == best)
            moves.add(_step_toward(config, v, steps))

    else:
        reach = {}
        for v in config.occupied:
            if not st.in_biggest(v):
                r = st.toward_biggest(v)
                if r:
                    reach[v] = r
        if not reach:
            raise ProtocolError("protocol stuck")
        winners = view_ranks(config, reach)[0]
        moves = set()
        for v in winners:
            near = min(reach[v].values())
            steps = sorted(s for s, dist in reach[v].items() if dist == near)
            moves.add(_step_toward(config, v, steps))

    if not moves:
        raise ProtocolError("protocol stuck")
    return frozenset(moves)
