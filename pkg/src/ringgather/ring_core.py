"""Ground-truth ring configurations and the structural queries over them.

A configuration is the robot count on each of the ``n`` ring nodes. Node
``i`` is adjacent to ``i - 1`` and ``i + 1`` (mod ``n``); "clockwise" means
increasing index and is only a simulator convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence


class ConfigurationError(ValueError):
    """Raised when a structural query is undefined for a configuration."""


@dataclass(frozen=True)
class Configuration:
    n: int
    occupancy: tuple[int, ...]
    k: int = field(init=False)

    def __post_init__(self) -> None:
        occ = tuple(int(c) for c in self.occupancy)
        if len(occ) != self.n:
            raise ConfigurationError(f"occupancy has {len(occ)} entries, expected n={self.n}")
        if self.n < 1:
            raise ConfigurationError("ring needs at least one node")
        if any(c < 0 for c in occ):
            raise ConfigurationError("negative robot count")
        object.__setattr__(self, "occupancy", occ)
        object.__setattr__(self, "k", sum(occ))

    @classmethod
    def from_nodes(cls, n: int, nodes: Iterable[int]) -> "Configuration":
        """Build from a node list; repeated nodes stack into towers."""
        occ = [0] * n
        for v in nodes:
            occ[v % n] += 1
        return cls(n, tuple(occ))

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        """Parse the ``n=<int>;occ=<c0>,...`` text form."""
        try:
            head, tail = text.strip().split(";", 1)
            key_n, val_n = head.split("=", 1)
            key_o, val_o = tail.split("=", 1)
            if key_n.strip() != "n" or key_o.strip() != "occ":
                raise ValueError
            n = int(val_n)
            occ = tuple(int(c) for c in val_o.split(","))
        except ValueError as exc:
            raise ConfigurationError(f"malformed configuration text: {text!r}") from exc
        return cls(n, occ)

    def __str__(self) -> str:
        return f"n={self.n};occ=" + ",".join(str(c) for c in self.occupancy)

    @cached_property
    def pattern(self) -> tuple[bool, ...]:
        return tuple(c > 0 for c in self.occupancy)

    @cached_property
    def occupied(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.occupancy) if c > 0)

    def is_tower(self, node: int) -> bool:
        return self.occupancy[node % self.n] >= 2

    @property
    def towers(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.occupancy) if c >= 2)

    def move(self, src: int, dst: int) -> "Configuration":
        if self.occupancy[src] == 0:
            raise ConfigurationError(f"no robot at node {src}")
        occ = list(self.occupancy)
        occ[src] -= 1
        occ[dst % self.n] += 1
        return Configuration(self.n, tuple(occ))

    def rotate(self, r: int) -> "Configuration":
        """Robot at node i moves to node i + r."""
        n = self.n
        occ = [0] * n
        for i, c in enumerate(self.occupancy):
            occ[(i + r) % n] = c
        return Configuration(n, tuple(occ))

    def reflect(self, t: int) -> "Configuration":
        """Apply the reflection i -> (t - i) mod n."""
        n = self.n
        occ = [0] * n
        for i, c in enumerate(self.occupancy):
            occ[(t - i) % n] = c
        return Configuration(n, tuple(occ))


def validate_instance(n: int, k: int) -> None:
    """Check the protocol's instance constraints: k odd and 2 < k < n - 3."""
    if k % 2 == 0:
        raise ConfigurationError(f"k={k} must be odd")
    if not 2 < k < n - 3:
        raise ConfigurationError(f"need 2 < k < n - 3, got n={n}, k={k}")


def is_protocol_valid(config: Configuration) -> bool:
    """True for tower-free, non-periodic instances with valid (n, k)."""
    try:
        validate_instance(config.n, config.k)
    except ConfigurationError:
        return False
    return not config.towers and not is_periodic(config.pattern)


@dataclass(frozen=True)
class Hole:
    start: int
    size: int

    def nodes(self, n: int) -> list[int]:
        return [(self.start + j) % n for j in range(self.size)]


@dataclass(frozen=True)
class Segment:
    start: int  # occupied node; "from" in the ring vocabulary
    end: int  # next occupied node clockwise
    distance: int


@dataclass(frozen=True)
class NodeBlock:
    start: int
    size: int

    def nodes(self, n: int) -> list[int]:
        return [(self.start + j) % n for j in range(self.size)]

    def end(self, n: int) -> int:
        return (self.start + self.size - 1) % n


@dataclass(frozen=True)
class DBlock:
    d: int
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def borders(self) -> tuple[int, int]:
        return self.members[0], self.members[-1]


def _require_robot(config: Configuration) -> None:
    if not config.occupied:
        raise ConfigurationError("empty configuration")


def _runs(pattern: Sequence[bool], value: bool) -> list[tuple[int, int]]:
    """Maximal circular runs of ``value`` as (start, length), ordered by start."""
    n = len(pattern)
    if all(p == value for p in pattern):
        return [(0, n)]
    runs = []
    for i in range(n):
        if pattern[i] == value and pattern[i - 1] != value:
            length = 0
            while pattern[(i + length) % n] == value:
                length += 1
            runs.append((i, length))
    return runs


def holes(config: Configuration) -> list[Hole]:
    _require_robot(config)
    if all(config.pattern):
        return []
    return [Hole(s, m) for s, m in _runs(config.pattern, False)]


def node_blocks(config: Configuration) -> list[NodeBlock]:
    _require_robot(config)
    return [NodeBlock(s, m) for s, m in _runs(config.pattern, True)]


def segments(config: Configuration) -> list[Segment]:
    """Clockwise segments between consecutive occupied nodes."""
    occ = config.occupied
    n = config.n
    if len(occ) < 2:
        raise ConfigurationError("undefined")
    out = []
    for a, b in zip(occ, occ[1:] + occ[:1]):
        out.append(Segment(a, b, (b - a) % n or n))
    return out


def inter_distance(config: Configuration) -> int:
    if len(config.occupied) < 2:
        raise ConfigurationError("undefined")
    return min(s.distance for s in segments(config))


def d_blocks(config: Configuration) -> tuple[int, list[DBlock], list[int]]:
    """Inter-distance, its maximal d.blocks and the isolated occupied nodes."""
    segs = segments(config)
    d = min(s.distance for s in segs)
    w = len(segs)
    if all(s.distance == d for s in segs):
        return d, [DBlock(d, config.occupied)], []
    # rotate so that segs[0] is not a d-step, then each run of d-steps is a block
    first = next(i for i, s in enumerate(segs) if s.distance != d)
    order = segs[first + 1:] + segs[: first + 1]
    blocks: list[DBlock] = []
    isolated: list[int] = []
    current = [order[0].start]
    for s in order:
        if s.distance == d:
            current.append(s.end)
        else:
            if len(current) >= 2:
                blocks.append(DBlock(d, tuple(current)))
            else:
                isolated.append(current[0])
            current = [s.end]
    assert len(current) == 1 and current[0] == order[0].start
    assert sum(b.size for b in blocks) + len(isolated) == w
    blocks.sort(key=lambda b: b.members[0])
    isolated.sort()
    return d, blocks, isolated


# -- symmetry ---------------------------------------------------------------

class SymmetryKind:
    PERIODIC = "periodic"
    SYMMETRIC = "symmetric"
    RIGID = "rigid"


@dataclass(frozen=True)
class SymmetryClass:
    kind: str
    reflection: int | None = None  # t in [0, 2n), map i -> (t - i) mod n

    def __str__(self) -> str:
        if self.kind == SymmetryKind.SYMMETRIC:
            return f"symmetric(t={self.reflection})"
        return self.kind


def is_periodic(pattern: Sequence[bool]) -> bool:
    n = len(pattern)
    # the smallest period divides n, so checking proper divisors suffices
    for r in range(1, n):
        if n % r == 0 and all(pattern[i] == pattern[(i + r) % n] for i in range(n)):
            return True
    return False


def reflection_code(n: int, t: int) -> int:
    """Canonical encoding of the map i -> (t - i) mod n inside [0, 2n).

    Axes through a node v are encoded as 2v (the smallest such value), axes
    through edges only as the smallest odd representative.
    """
    t %= n
    if t % 2 == 0:
        return t
    if n % 2 == 1:
        return t + n
    return t


def reflection_fixes(pattern: Sequence[bool], t: int) -> bool:
    n = len(pattern)
    return all(pattern[i] == pattern[(t - i) % n] for i in range(n))


def classify_symmetry(config: Configuration | Sequence[bool]) -> SymmetryClass:
    pattern = config.pattern if isinstance(config, Configuration) else tuple(config)
    n = len(pattern)
    if is_periodic(pattern):
        return SymmetryClass(SymmetryKind.PERIODIC)
    for t in range(n):
        if reflection_fixes(pattern, t):
            return SymmetryClass(SymmetryKind.SYMMETRIC, reflection_code(n, t))
    return SymmetryClass(SymmetryKind.RIGID)


def is_gathered(config: Configuration) -> bool:
    occ = config.occupied
    return len(occ) == 1 and config.occupancy[occ[0]] == config.k


def dihedral(n: int) -> Iterator[tuple[int, int]]:
    """All 2n symmetries as (sign, shift): i -> sign * i + shift (mod n)."""
    for s in range(n):
        yield 1, s
    for s in range(n):
        yield -1, s


def ring_distance(n: int, a: int, b: int) -> int:
    x = (a - b) % n
    return min(x, n - x)


def random_configuration(n: int, k: int, rng) -> Configuration:
    """A uniformly drawn protocol-valid configuration (rejection sampling)."""
    validate_instance(n, k)
    while True:
        config = Configuration.from_nodes(n, rng.sample(range(n), k))
        if not is_periodic(config.pattern):
            return config
