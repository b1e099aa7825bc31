"""Exhaustive exploration of every scheduler interleaving on small rings.

A state is the multiset of robots, each ``(position, intent, done)`` where
``done`` marks a completed cycle in the current round, plus the bit "a single
1.block has been seen on this path". Intents are stored resolved and
position-relative, so a state is closed under rotation and reflection of the
ring and can be reduced to a canonical representative.

Liveness is decided exactly under plain (unbounded) fairness: an infinite
execution is fair iff it closes rounds infinitely often, so a reachable
cycle through a round-closing edge is a fair execution that never gathers.
Every F-bounded execution is fair, so a clean verdict covers any bound F.
With ``bound=F`` the robots also carry their age and only F-feasible actions
are explored; then every cycle is a counterexample.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import phase2
from .executor import past_first_block, protocol_plan
from .ring_core import (
    Configuration,
    ConfigurationError,
    d_blocks,
    is_periodic,
    validate_instance,
)
from .schedulers import fair_feasible

READY, STAY, CW, CCW, CHOICE = range(5)
_FLIP = (READY, STAY, CCW, CW, CHOICE)


class Inconclusive(RuntimeError):
    """The state budget ran out before exploration finished."""


@dataclass
class Violation:
    prop: str
    detail: str
    trace: list[str]

    def as_dict(self) -> dict:
        return {"property": self.prop, "detail": self.detail, "trace": self.trace}


@dataclass
class Verdict:
    instances_checked: int = 0
    states_explored: int = 0
    max_rounds_observed: int = 0
    violations: list[Violation] = field(default_factory=list)
    inconclusive: bool = False
    per_instance_rounds: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.inconclusive

    def merge(self, other: "Verdict") -> "Verdict":
        return Verdict(
            self.instances_checked + other.instances_checked,
            self.states_explored + other.states_explored,
            max(self.max_rounds_observed, other.max_rounds_observed),
            self.violations + other.violations,
            self.inconclusive or other.inconclusive,
            {**self.per_instance_rounds, **other.per_instance_rounds},
        )

    def property_status(self) -> dict[str, str]:
        failed = {v.prop for v in self.violations}
        status = {}
        for p in ("P1", "P2", "P3", "P4", "P5"):
            if p in failed:
                status[p] = "violated"
            else:
                status[p] = "inconclusive" if self.inconclusive else "holds"
        return status

    def to_json(self) -> dict:
        return {
            "instances_checked": self.instances_checked,
            "states_explored": self.states_explored,
            "max_rounds_observed": self.max_rounds_observed,
            "inconclusive": self.inconclusive,
            "properties": self.property_status(),
            "violations": [v.as_dict() for v in self.violations],
        }

    def text(self) -> str:
        lines = [
            f"instances checked : {self.instances_checked}",
            f"states explored   : {self.states_explored}",
            f"max rounds        : {self.max_rounds_observed}",
        ]
        for p, s in self.property_status().items():
            lines.append(f"{p:<18}: {s}")
        for v in self.violations[:10]:
            lines.append(f"VIOLATION {v.prop}: {v.detail}")
        return "\n".join(lines)


PROPERTY_NAMES = {
    "P1": "no tower before the first single 1.block",
    "P2": "never periodic",
    "P3": "every fair execution gathers within the round limit",
    "P4": "in C_sp no tower outside v_t",
    "P5": "robots on a tower are never told to move",
}


# -- instance enumeration ---------------------------------------------------------

def canonical_pattern(nodes: Iterable[int], n: int) -> tuple[int, ...]:
    """Smallest sorted node tuple in the dihedral orbit of ``nodes``."""
    nodes = list(nodes)
    best = None
    for sign in (1, -1):
        for s in range(n):
            cand = tuple(sorted((sign * v + s) % n for v in nodes))
            if best is None or cand < best:
                best = cand
    return best


def enumerate_initials(n: int, k: int) -> list[Configuration]:
    """One tower-free, non-periodic configuration per dihedral orbit."""
    try:
        validate_instance(n, k)
    except ConfigurationError:
        raise
    reps = set()
    for nodes in itertools.combinations(range(n), k):
        if nodes != canonical_pattern(nodes, n):
            continue
        pattern = tuple(v in nodes for v in range(n))
        if is_periodic(pattern):
            continue
        reps.add(nodes)
    return [Configuration.from_nodes(n, nodes) for nodes in sorted(reps)]


# -- state encoding -----------------------------------------------------------------

def _occupancy(n: int, robots) -> list[int]:
    occ = [0] * n
    for r in robots:
        occ[r[0]] += 1
    return occ


def _single_block(pattern) -> bool:
    starts = sum(1 for i in range(len(pattern)) if pattern[i] and not pattern[i - 1])
    return starts == 1 or (starts == 0 and any(pattern))


@lru_cache(maxsize=None)
def _minimal_maps(occ: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Dihedral maps ``(sign, shift)`` sending ``occ`` to its smallest image.

    Only these can produce the smallest robot tuple, because the sorted robot
    tuple starts with the positions and hence orders like the occupancy.
    """
    n = len(occ)
    rev = occ[::-1]
    images = []
    for s in range(n):
        images.append((occ[n - s:] + occ[:n - s], 1, s))
        m = (n - 1 - s) % n
        images.append((rev[m:] + rev[:m], -1, s))
    low = min(img for img, _, _ in images)
    return tuple((sign, s) for img, sign, s in images if img == low)


class _Space:
    """Transition relation over encoded states ``(robots, seen)``."""

    def __init__(self, n: int, canonical: bool, bound: int | None):
        self.n = n
        self.canonical = canonical
        self.bound = bound

    def canon(self, robots, seen):
        if not self.canonical:
            return tuple(sorted(robots)), seen
        n = self.n
        best = None
        for sign, s in _minimal_maps(tuple(_occupancy(n, robots))):
            if sign == 1:
                cand = tuple(sorted(((r[0] + s) % n,) + r[1:] for r in robots))
            else:
                cand = tuple(sorted(((s - r[0]) % n, _FLIP[r[1]]) + r[2:] for r in robots))
            if best is None or cand < best:
                best = cand
        return best, seen

    def initial(self, config: Configuration):
        robots = []
        for v, c in enumerate(config.occupancy):
            for _ in range(c):
                robots.append((v, READY, 0, 0) if self.bound else (v, READY, 0))
        return self.canon(robots, past_first_block(config))

    def config_of(self, robots) -> Configuration:
        return Configuration(self.n, tuple(_occupancy(self.n, robots)))

    def absorbing(self, state) -> bool:
        robots, _ = state
        p0 = robots[0][0]
        return all(r[0] == p0 and r[1] in (READY, STAY) for r in robots)

    def intent_code(self, plan, pattern, occ, p) -> int:
        """Resolved intent of the robot at ``p``; mirrors executor.decide."""
        n = self.n
        if plan.error:
            raise _DecideViolation(plan.error)
        m = occ[p] >= 2
        if plan.phase == 1 and m:
            raise _DecideViolation(f"robot on a tower at {p} outside C_sp")
        if plan.single_pair:
            if m:
                return STAY
            return CW if pattern[(p + 1) % n] else CCW
        targets = plan.moves.get(p)
        if not targets:
            return STAY
        if len(targets) == 2:
            return CHOICE
        return CW if targets[0] == (p + 1) % n else CCW

    def successors(self, state):
        """Yield ``(label, next_state, closes_round)``; raises on decide violations."""
        robots, seen = state
        n = self.n
        bound = self.bound
        k = len(robots)
        occ = None
        plan = None
        pattern = None
        for idx in range(k):
            if idx > 0 and robots[idx] == robots[idx - 1]:
                continue
            r = robots[idx]
            p, ic, done = r[0], r[1], r[2]
            if ic == READY:
                if plan is None:
                    occ = _occupancy(n, robots)
                    pattern = tuple(c > 0 for c in occ)
                    plan = protocol_plan(pattern)
                try:
                    new_ic = self.intent_code(plan, pattern, occ, p)
                except _DecideViolation as exc:
                    raise _DecideViolation(f"{exc} (robot at {p})") from None
                outcomes = [(f"look@{p}", (p, new_ic, done), False)]
            elif ic == CHOICE:
                outcomes = [(f"move@{p}->{(p + s) % n}", ((p + s) % n, READY, 1), True)
                            for s in (1, -1)]
            else:
                step = {STAY: 0, CW: 1, CCW: -1}[ic]
                tgt = (p + step) % n
                outcomes = [(f"{'stay' if step == 0 else 'move'}@{p}->{tgt}",
                             (tgt, READY, 1), True)]
            for label, head, completes in outcomes:
                new = list(robots)
                if bound:
                    ages = [x[3] + 1 for x in robots]
                    if completes:
                        ages[idx] = 0
                    new = [x[:3] + (a,) for x, a in zip(robots, ages)]
                    new[idx] = head + (ages[idx],)
                    work = [2 if x[1] == READY else 1 for x in new]
                    if not fair_feasible(ages, work, bound):
                        continue
                else:
                    new[idx] = head
                closes = False
                if completes and all(x[2] for x in new):
                    closes = True
                    new = [(x[0], x[1], 0) + x[3:] for x in new]
                new_occ = _occupancy(n, new)
                new_seen = seen or _single_block([c > 0 for c in new_occ])
                yield label, self.canon(new, new_seen), closes

    def describe(self, state) -> str:
        robots, seen = state
        config = self.config_of(robots)
        names = {READY: "r", STAY: "s", CW: "+", CCW: "-", CHOICE: "?"}
        rs = " ".join(f"{r[0]}{names[r[1]]}{'*' if r[2] else ''}" for r in robots)
        return f"{config} | {rs} | seen={int(seen)}"


class _DecideViolation(Exception):
    pass


@lru_cache(maxsize=1 << 16)
def _periodic(pattern: tuple[bool, ...]) -> bool:
    return is_periodic(pattern)


def state_violations(space: _Space, state) -> list[tuple[str, str]]:
    robots, seen = state
    occ = _occupancy(space.n, robots)
    pattern = tuple(c > 0 for c in occ)
    out = []
    towers = [v for v, c in enumerate(occ) if c >= 2]
    if towers and not seen:
        out.append(("P1", f"tower at {towers} before the first single 1.block"))
    if _periodic(pattern):
        out.append(("P2", "periodic configuration reached"))
    plan = protocol_plan(pattern)
    gathered = sum(pattern) == 1
    if plan.phase == 2 and not gathered:
        cls = phase2.classify_pattern(pattern)
        if cls.v_t is not None:
            stray = [v for v in towers if v != cls.v_t]
            if stray:
                out.append(("P4", f"tower at {stray} outside v_t={cls.v_t} in {cls.label}"))
        bad = [v for v in towers if v in plan.moves]
        if bad:
            out.append(("P5", f"tower robots at {bad} told to move in {cls.label}"))
    return out


# -- graph exploration ------------------------------------------------------------------

@dataclass
class _Graph:
    index: dict
    states: list
    edges: list  # per state: list of (succ, closes_round)
    parent: list  # per state: (pred, label) or None
    roots: dict  # initial label -> state index
    bad: dict = field(default_factory=dict)  # state index -> [(prop, detail)]


def _build(space: _Space, roots: dict, max_states: int,
           goal: Callable | None = None, check: Callable | None = None) -> _Graph:
    index: dict = {}
    states: list = []
    edges: list = []
    parent: list = []
    bad: dict = {}
    root_ids = {}

    def add(state, par):
        i = index.get(state)
        if i is None:
            i = len(states)
            if i >= max_states:
                raise Inconclusive(f"state budget {max_states} exceeded")
            index[state] = i
            states.append(state)
            edges.append(None)
            parent.append(par)
        return i

    for label, st in roots.items():
        root_ids[label] = add(st, None)
    frontier = list(root_ids.values())
    while frontier:
        nxt = []
        for i in frontier:
            if edges[i] is not None:
                continue
            state = states[i]
            found = state_violations(space, state)
            if check is not None:
                found += check(space, state)
            if found:
                bad[i] = found
                edges[i] = []
                continue
            if space.absorbing(state) or (goal is not None and goal(space, state)):
                edges[i] = []
                continue
            out = []
            try:
                for label, succ, closes in space.successors(state):
                    j = add(succ, (i, label))
                    out.append((j, closes))
                    if edges[j] is None:
                        nxt.append(j)
            except _DecideViolation as exc:
                bad[i] = [("P3", f"decide flagged a protocol violation: {exc}")]
                out = []
            edges[i] = out
        frontier = nxt
    return _Graph(index, states, edges, parent, root_ids, bad)


def _sccs(edges: list) -> list[int]:
    """Iterative Tarjan; returns component id per node, ids in reverse
    topological order (a component's successors get smaller ids)."""
    n = len(edges)
    idx = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack: list[int] = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if idx[root] != -1:
            continue
        work = [(root, 0)]
        idx[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, pos = work[-1]
            succ = edges[v]
            if pos < len(succ):
                work[-1] = (v, pos + 1)
                w = succ[pos][0]
                if idx[w] == -1:
                    idx[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], idx[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == idx[v]:
                    while True:
                        w = stack.pop()
                        on[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return comp


def _path_to(graph: _Graph, space: _Space, i: int) -> list[str]:
    steps = []
    while i is not None:
        par = graph.parent[i]
        steps.append(space.describe(graph.states[i]))
        if par is None:
            break
        i, label = par
        steps.append(f"  {label}")
    return list(reversed(steps))


def _analyse(graph: _Graph, space: _Space, round_limit: int | None,
             bounded: bool) -> tuple[dict[str, int], list[Violation]]:
    violations: list[Violation] = []
    for i, found in graph.bad.items():
        for prop, detail in found:
            violations.append(Violation(prop, detail, _path_to(graph, space, i)))

    comp = _sccs(graph.edges)
    ncomp = max(comp) + 1 if comp else 0
    members: list[list[int]] = [[] for _ in range(ncomp)]
    for v, c in enumerate(comp):
        members[c].append(v)
    longest = [0] * ncomp
    for c in range(ncomp):
        best = 0
        for v in members[c]:
            if not graph.edges[v] and v not in graph.bad:
                # absorbing: the round in progress counts if it has started
                robots = graph.states[v][0]
                best = max(best, 1 if any(r[2] for r in robots) else 0)
            for w, closes in graph.edges[v]:
                if comp[w] == c:
                    if closes or bounded:
                        violations.append(Violation(
                            "P3", "fair execution cycles without gathering",
                            _path_to(graph, space, v)))
                        break
                else:
                    best = max(best, longest[comp[w]] + (1 if closes else 0))
        longest[c] = best
    per_root = {label: longest[comp[i]] for label, i in graph.roots.items()}
    if round_limit is not None:
        for label, r in per_root.items():
            if r > round_limit:
                violations.append(Violation(
                    "P3", f"{label}: worst case {r} rounds exceeds limit {round_limit}", []))
    # one report per (property, detail) is enough
    seen = set()
    unique = []
    for v in violations:
        key = (v.prop, v.detail)
        if key not in seen:
            seen.add(key)
            unique.append(v)
    return per_root, unique


def explore_many(initials: Sequence[Configuration], bound: int | None = None,
                 round_limit: int | None = None, canonical: bool = True,
                 max_states: int = 5_000_000) -> Verdict:
    """Explore all interleavings from several initials of the same ring size."""
    if not initials:
        return Verdict()
    n = initials[0].n
    space = _Space(n, canonical, bound)
    if round_limit is None:
        round_limit = 10 * n * n
    roots = {str(c): space.initial(c) for c in initials}
    try:
        graph = _build(space, roots, max_states)
    except Inconclusive:
        return Verdict(len(initials), max_states, 0, [], inconclusive=True)
    per_root, violations = _analyse(graph, space, round_limit, bounded=bound is not None)
    return Verdict(len(initials), len(graph.states), max(per_root.values(), default=0),
                   violations, False, per_root)


def explore(initial: Configuration, bound: int | None = None, round_limit: int | None = None,
            canonical: bool = True, max_states: int = 5_000_000) -> Verdict:
    return explore_many([initial], bound, round_limit, canonical, max_states)


def reachable_configurations(initial: Configuration, canonical: bool = True,
                             bound: int | None = None) -> set[tuple[int, ...]]:
    """Dihedral-canonical occupancy vectors of every reachable state."""
    space = _Space(initial.n, canonical, bound)
    graph = _build(space, {"init": space.initial(initial)}, 10_000_000)
    out = set()
    for robots, _ in graph.states:
        occ = _occupancy(initial.n, robots)
        out.add(_canonical_occupancy(occ))
    return out


def _canonical_occupancy(occ: Sequence[int]) -> tuple[int, ...]:
    n = len(occ)
    best = None
    for s in range(n):
        for sign in (1, -1):
            cand = tuple(occ[(sign * i + s) % n] for i in range(n))
            if best is None or cand < best:
                best = cand
    return best


def check_instances(n: int, k: int, bound: int | None = None,
                    round_limit: int | None = None, max_states: int = 5_000_000) -> Verdict:
    initials = enumerate_initials(n, k)
    return explore_many(initials, bound, round_limit, max_states=max_states)


# -- phase-1 progress probe ------------------------------------------------------------

@dataclass(frozen=True)
class Milestone:
    round: int
    d: int
    biggest: int  # size of the biggest d.block


def phase1_milestones(initial: Configuration, trace) -> list[Milestone]:
    """Rounds at which the phase-1 progress measure (inter-distance down, or
    biggest d.block up at the same inter-distance) reaches a new best.

    Rounds are recounted from the trace: a move or stay event completes the
    acting robot's cycle.
    """
    def measure(config):
        d, blocks, _ = d_blocks(config)
        return d, max((b.size for b in blocks), default=1)

    d, big = measure(initial)
    out = [Milestone(0, d, big)]
    k = initial.k
    done: set[int] = set()
    rounds = 0
    for e in trace:
        if e.kind != "look":
            done.add(e.robot)
            if len(done) == k:
                rounds += 1
                done = set()
        after = e.after
        if after.towers or protocol_plan(after.pattern).phase == 2:
            break
        d2, big2 = measure(after)
        if (d2, -big2) < (d, -big):
            d, big = d2, big2
            out.append(Milestone(rounds + (1 if done else 0), d, big))
    return out
