"""Second-phase transition suite.

Every C_sp class is built on a ring, explored over all interleavings until
the next stable class is reached, and checked against the expected chain::

    C_sb(b)      -> C_bl(1, (b-3)/2)   via C_st((b-3)/2)        (b >= 5)
    C_sb(3)      -> gathered           via C_sb(2)
    C_sb(2)      -> gathered
    C_bl(b0, b1) -> C_bl(b0+2, b1-1)   via C_sbl(b0+1, b1-1)    (b1 >= 2)
    C_bl(b0, 1)  -> C_sb(b0+2)         via C_ssb(b0+1)
    C_ssb(b)     -> C_sb(b+1)
    C_st(b)      -> C_bl(1, b)
    C_sbl(b0,b1) -> C_bl(b0+1, b1)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

from . import phase2
from .checker import (
    CCW,
    CHOICE,
    CW,
    Verdict,
    Violation,
    _analyse,
    _build,
    _DecideViolation,
    _occupancy,
    _Space,
    explore,
    explore_many,
)
from .executor import protocol_plan
from .ring_core import Configuration, ConfigurationError

log = logging.getLogger(__name__)

GATHERED = "gathered"
ROUND_BOUND = 3


def _label(variant: str, *params: int) -> str:
    return f"C_{variant}(" + ",".join(str(p) for p in params) + ")"


def expected_chain(variant: str, params: tuple[int, ...]) -> tuple[str, set[str]]:
    """Target label and allowed intermediate labels for one class."""
    sb, bl, ssb, st, sbl = (phase2.SINGLE_BLOCK, phase2.BLOCK_LEADER,
                            phase2.SEMI_SINGLE_BLOCK, phase2.SEMI_TWIN,
                            phase2.SEMI_BLOCK_LEADER)
    if variant == sb:
        (b,) = params
        if b == 2:
            return GATHERED, set()
        if b == 3:
            return GATHERED, {_label(sb, 2)}
        return _label(bl, 1, (b - 3) // 2), {_label(st, (b - 3) // 2)}
    if variant == bl:
        b0, b1 = params
        if b1 >= 2:
            return _label(bl, b0 + 2, b1 - 1), {_label(sbl, b0 + 1, b1 - 1)}
        return _label(sb, b0 + 2), {_label(ssb, b0 + 1)}
    if variant == ssb:
        (b,) = params
        return _label(sb, b + 1), set()
    if variant == st:
        (b,) = params
        return _label(bl, 1, b), set()
    if variant == sbl:
        b0, b1 = params
        return _label(bl, b0 + 1, b1), set()
    raise ValueError(variant)


def build_pattern(variant: str, params: tuple[int, ...]) -> list[int]:
    """Occupied nodes of a class instance laid out from node 0."""
    if variant == phase2.SINGLE_BLOCK:
        (b,) = params
        return list(range(b))
    if variant == phase2.BLOCK_LEADER:
        b0, b1 = params
        sizes = [b1, b0, b1]
    elif variant == phase2.SEMI_SINGLE_BLOCK:
        (b,) = params
        sizes = [b, 1]
    elif variant == phase2.SEMI_TWIN:
        (b,) = params
        sizes = [b, b + 2]
    elif variant == phase2.SEMI_BLOCK_LEADER:
        b0, b1 = params
        sizes = [b1, b0, b1 + 1]
    else:
        raise ValueError(variant)
    nodes, cur = [], 0
    for s in sizes:
        nodes += list(range(cur, cur + s))
        cur += s + 1
    return nodes


def construct(variant: str, params: tuple[int, ...], k: int, n: int) -> Configuration:
    """A configuration of class ``variant(params)`` with ``k`` robots; robots
    beyond the occupied nodes stack on v_t."""
    nodes = build_pattern(variant, params)
    if k < len(nodes):
        raise ConfigurationError(f"{variant}{params} needs at least {len(nodes)} robots")
    config = Configuration.from_nodes(n, nodes)
    cls = phase2.classify_csp(config)
    expected = _label(variant, *params)
    if cls is None or cls.label != expected:
        raise ConfigurationError(f"built {config} is {cls} not {expected}")
    extra = k - len(nodes)
    if extra:
        v_t = cls.v_t if cls.v_t is not None else nodes[0]
        occ = list(config.occupancy)
        occ[v_t] += extra
        config = Configuration(n, tuple(occ))
    return config


def parameterizations(k_max: int) -> list[tuple[str, tuple[int, ...], int]]:
    """``(variant, params, occupied nodes)`` with at most ``k_max`` nodes."""
    out = []
    for b in range(2, k_max + 1):
        if b == 2 or b % 2 == 1:
            out.append((phase2.SINGLE_BLOCK, (b,), b))
    for b0 in range(1, k_max + 1, 2):
        for b1 in range(1, k_max + 1):
            if b0 + 2 * b1 <= k_max:
                out.append((phase2.BLOCK_LEADER, (b0, b1), b0 + 2 * b1))
    for b in range(2, k_max + 1, 2):
        if b + 1 <= k_max:
            out.append((phase2.SEMI_SINGLE_BLOCK, (b,), b + 1))
    for b in range(1, k_max + 1):
        if 2 * b + 2 <= k_max:
            out.append((phase2.SEMI_TWIN, (b,), 2 * b + 2))
    for b0 in range(2, k_max + 1, 2):
        for b1 in range(1, k_max + 1):
            if b0 + 2 * b1 + 1 <= k_max:
                out.append((phase2.SEMI_BLOCK_LEADER, (b0, b1), b0 + 2 * b1 + 1))
    return out


@dataclass
class TransitionResult:
    initial: str
    source: str
    target: str
    k: int
    n: int
    towered: bool
    transition_rounds: int
    gathering_rounds: int | None  # None when not measured
    states: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and self.transition_rounds <= ROUND_BOUND


def _pattern_label(space: _Space, robots) -> tuple[str, int | None]:
    return _occupancy_label(tuple(_occupancy(space.n, robots)))


@lru_cache(maxsize=1 << 16)
def _occupancy_label(occ: tuple[int, ...]) -> tuple[str, int | None]:
    pattern = tuple(c > 0 for c in occ)
    if sum(pattern) == 1:
        return GATHERED, occ.index(max(occ))
    cls = phase2.classify_pattern(pattern)
    if cls is None:
        return "outside C_sp", None
    v_t = cls.v_t
    if v_t is None:  # C_sb(2): the tower marks it
        towers = [v for v, c in enumerate(occ) if c >= 2]
        v_t = towers[0] if len(towers) == 1 else None
    return cls.label, v_t


def _outdated(space: _Space, robots) -> list[int]:
    """Robots whose pending move differs from what they would decide now."""
    occ = _occupancy(space.n, robots)
    pattern = tuple(c > 0 for c in occ)
    plan = protocol_plan(pattern)
    out = []
    for r in robots:
        if r[1] in (CW, CCW, CHOICE):
            try:
                now = space.intent_code(plan, pattern, occ, r[0])
            except _DecideViolation:
                now = None
            if now != r[1]:
                out.append(r[0])
    return out


def check_transition(config: Configuration, variant: str, params: tuple[int, ...],
                     full: bool = True) -> TransitionResult:
    """Explore every interleaving from ``config`` until the expected next
    class is reached; with ``full`` also measure worst-case gathering rounds."""
    source = _label(variant, *params)
    target, via = expected_chain(variant, params)
    allowed = {source} | via
    space = _Space(config.n, canonical=False, bound=None)
    root = space.initial(config)
    v_t0 = _pattern_label(space, root[0])[1]

    def is_goal(sp, state):
        return _pattern_label(sp, state[0])[0] == target

    def check(sp, state):
        label, v_t = _pattern_label(sp, state[0])
        found = []
        if label == target:
            stale = _outdated(sp, state[0])
            if stale and target != GATHERED:
                found.append(("L", f"outdated robots at {stale} on reaching {target}"))
        elif label not in allowed:
            found.append(("L", f"{source} reached {label}; expected {sorted(allowed)} then {target}"))
        if v_t is not None and v_t0 is not None and v_t != v_t0:
            found.append(("L", f"tower-construction node moved from {v_t0} to {v_t}"))
        return found

    graph = _build(space, {source: root}, 2_000_000, goal=is_goal, check=check)
    per_root, violations = _analyse(graph, space, None, bounded=False)
    result = TransitionResult(str(config), source, target, config.k, config.n,
                              len(config.towers) > 0, per_root[source], None, len(graph.states),
                              violations)
    if full:
        v = explore(config)
        result.violations += v.violations
        result.gathering_rounds = v.max_rounds_observed
    return result


def lemma_suite(k_max: int = 9, n: int | None = None,
                full_gathering_k: int = 7) -> tuple[Verdict, list[TransitionResult]]:
    """Run every constructible class with odd k <= k_max on n = k + 5 (or ``n``).

    Transitions are explored per instance. Worst-case gathering rounds come
    from one shared exhaustive exploration per (k, n), whose per-root results
    are exact because every root is explored completely. Above
    ``full_gathering_k`` the shared exploration only starts from C_sb(k),
    the single block every phase-2 run begins with.
    """
    results = []
    batches: dict[tuple[int, int], list[Configuration]] = {}
    for variant, params, occupied in parameterizations(k_max):
        for k in range(3, k_max + 1, 2):
            if k < occupied:
                continue
            ring = n if n is not None else k + 5
            if not 2 < k < ring - 3:
                log.info("skipping %s%s with k=%d on n=%d", variant, params, k, ring)
                continue
            config = construct(variant, params, k, ring)
            results.append(check_transition(config, variant, params, full=False))
            if k <= full_gathering_k or (variant, params) == (phase2.SINGLE_BLOCK, (k,)):
                batches.setdefault((k, ring), []).append(config)
    verdict = Verdict(instances_checked=len(results),
                      states_explored=sum(r.states for r in results))
    for configs in batches.values():
        v = explore_many(configs)
        verdict = verdict.merge(Verdict(0, v.states_explored, v.max_rounds_observed,
                                        v.violations, v.inconclusive))
        for r in results:
            if r.initial in v.per_instance_rounds:
                r.gathering_rounds = v.per_instance_rounds[r.initial]
    for r in results:
        if r.gathering_rounds is not None:
            verdict.per_instance_rounds[f"{r.source} k={r.k} n={r.n}"] = r.gathering_rounds
        verdict.violations += r.violations
        if r.transition_rounds > ROUND_BOUND:
            verdict.violations.append(Violation(
                "L", f"{r.source} (k={r.k}) took {r.transition_rounds} rounds to reach {r.target}", []))
    return verdict, results


def gathering_constant(results: list[TransitionResult]) -> float:
    """Largest measured gathering_rounds / k^2 over the suite."""
    return max((r.gathering_rounds / r.k ** 2 for r in results
                if r.gathering_rounds is not None), default=0.0)
