"""What a single robot perceives: its view and comparisons between views."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ring_core import Configuration, ConfigurationError


@dataclass(frozen=True)
class View:
    sequence: tuple[int, ...]
    multiplicity: bool
    symmetric: bool


def direction_sequence(config: Configuration, node: int, step: int) -> tuple[int, ...]:
    """Segment distances met walking from ``node`` in direction ``step`` (+1/-1).

    Works on the occupied pattern; a lone occupied node yields ``(n,)``.
    """
    n = config.n
    pattern = config.pattern
    if not pattern[node % n]:
        raise ConfigurationError("no robot here")
    out = []
    dist = 0
    cur = node
    for _ in range(n):
        cur = (cur + step) % n
        dist += 1
        if pattern[cur]:
            out.append(dist)
            dist = 0
    return tuple(out)


def view_at(config: Configuration, node: int) -> View:
    cw = direction_sequence(config, node, +1)
    ccw = direction_sequence(config, node, -1)
    return View(max(cw, ccw), config.occupancy[node % config.n] >= 2, cw == ccw)


def compare_views(a: View, b: View) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``.

    Only the sequences take part; the multiplicity bit is ignored.
    """
    if len(a.sequence) != len(b.sequence):
        raise ConfigurationError("incomparable")
    return (a.sequence > b.sequence) - (a.sequence < b.sequence)


def max_view_nodes(config: Configuration, candidates: Iterable[int]) -> set[int]:
    cands = set(candidates)
    if not cands:
        raise ConfigurationError("empty candidate set")
    views = {v: view_at(config, v).sequence for v in cands}
    best = max(views.values())
    return {v for v, s in views.items() if s == best}


def view_ranks(config: Configuration, candidates: Iterable[int]) -> list[set[int]]:
    """Candidates grouped by view value, largest view first."""
    groups: dict[tuple[int, ...], set[int]] = {}
    for v in candidates:
        groups.setdefault(view_at(config, v).sequence, set()).add(v)
    return [groups[s] for s in sorted(groups, reverse=True)]
