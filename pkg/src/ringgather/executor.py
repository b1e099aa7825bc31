"""CORDA execution engine with instantaneous moves.

Each robot alternates a fused look+compute action, which stores an intent
computed from the current configuration, and a move action, which executes
that intent later, possibly after other robots have moved.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Sequence

from . import phase1, phase2
from .phase1 import MoveIntent, ProtocolError
from .ring_core import Configuration, ConfigurationError, is_gathered, is_periodic

log = logging.getLogger(__name__)

LOOK = "look"
MOVE = "move"

GATHERED = "gathered"
ROUND_LIMIT = "round_limit"
VIOLATION = "violation"


class ProtocolViolation(ProtocolError):
    """A robot was asked to decide in a situation the protocol excludes."""


class SchedulerContractError(RuntimeError):
    """The scheduler broke its fairness bound or issued an invalid action."""


@dataclass(frozen=True)
class Plan:
    """Everything the protocol prescribes for one occupied pattern."""

    phase: int
    label: str
    moves: dict[int, tuple[int, ...]]
    single_pair: bool = False  # C_sb(2): the lone robot joins the tower
    error: str | None = None


@lru_cache(maxsize=None)
def protocol_plan(pattern: tuple[bool, ...]) -> Plan:
    n = len(pattern)
    cls = phase2.classify_pattern(pattern)
    if cls is not None:
        if cls.variant == phase2.SINGLE_BLOCK and cls.params == (2,):
            return Plan(2, cls.label, {}, single_pair=True)
        return Plan(2, cls.label, {v: (t,) for v, t in cls.movers})
    flat = Configuration(n, tuple(int(p) for p in pattern))
    try:
        label = phase1.classify_phase1(flat).value
        moves = phase1.phase1_moves(flat)
    except ProtocolError as exc:
        return Plan(1, "stuck", {}, error=str(exc))
    return Plan(1, label, {m.robot: m.targets for m in moves})


def plan_moves(config: Configuration) -> frozenset[MoveIntent]:
    """The full move set of ``config`` including the multiplicity-driven case."""
    plan = protocol_plan(config.pattern)
    if plan.error:
        raise ProtocolError(plan.error)
    if plan.single_pair:
        cls = phase2.classify_csp(config)
        return phase2.phase2_moves(config, cls)
    return frozenset(MoveIntent(v, t) for v, t in plan.moves.items())


def decide(config: Configuration, robot_node: int, local_multiplicity: bool) -> MoveIntent | None:
    """The intent of the robot on ``robot_node``; ``None`` means stay.

    Only the occupied pattern and the robot's own multiplicity bit are used.
    """
    pattern = config.pattern
    if not pattern[robot_node]:
        raise ConfigurationError("no robot here")
    plan = protocol_plan(pattern)
    if plan.error:
        raise ProtocolViolation(plan.error)
    if plan.phase == 1 and local_multiplicity:
        raise ProtocolViolation(f"robot on a tower at {robot_node} outside C_sp")
    if plan.single_pair:
        if local_multiplicity:
            return None
        n = config.n
        other = (robot_node + 1) % n if pattern[(robot_node + 1) % n] else (robot_node - 1) % n
        return MoveIntent(robot_node, (other,))
    targets = plan.moves.get(robot_node)
    return MoveIntent(robot_node, targets) if targets else None


def is_single_block(pattern: Sequence[bool]) -> bool:
    """True when the occupied nodes form one contiguous run (a single 1.block)."""
    n = len(pattern)
    if not any(pattern):
        return False
    if all(pattern):
        return True
    starts = sum(1 for i in range(n) if pattern[i] and not pattern[i - 1])
    return starts == 1


def past_first_block(config: Configuration) -> bool:
    """Initial value of the single-1.block milestone.

    A run seeded directly inside C_sp with its towers on v_t stands for the
    tail of an execution that already went through a single 1.block.
    """
    if is_single_block(config.pattern):
        return True
    if not config.towers:
        return False
    cls = phase2.classify_csp(config)
    return cls is not None and cls.v_t is not None and set(config.towers) == {cls.v_t}


# -- execution state ----------------------------------------------------------

@dataclass(frozen=True)
class Pending:
    intent: MoveIntent | None
    snapshot_step: int
    phase: int
    label: str


@dataclass(frozen=True)
class Robot:
    position: int
    pending: Pending | None = None  # None means ready


@dataclass(frozen=True)
class SchedulerAction:
    robot: int
    kind: str  # LOOK or MOVE
    choice: int | None = None  # resolves a pending scheduler-choice target


@dataclass(frozen=True)
class TraceEvent:
    step: int
    robot: int
    kind: str  # look | move | stay
    phase: int
    label: str
    before: Configuration
    after: Configuration
    intent: str | None = None

    def to_json(self) -> str:
        rec = {
            "step": self.step,
            "robot": self.robot,
            "kind": self.kind,
            "phase": self.phase,
            "class": self.label,
            "before": str(self.before),
            "after": str(self.after),
            "intent": self.intent,
        }
        return json.dumps(rec, separators=(",", ":"))


@dataclass(frozen=True)
class ExecutionState:
    config: Configuration
    robots: tuple[Robot, ...]
    step: int = 0
    rounds: int = 0
    completed: frozenset[int] = frozenset()
    ages: tuple[int, ...] = ()
    first_single_1block_seen: bool = False

    @classmethod
    def initial(cls, config: Configuration, order: Sequence[int] | None = None) -> "ExecutionState":
        """Robots are numbered by node, or follow ``order`` (a node list)."""
        if order is None:
            order = [v for v in range(config.n) for _ in range(config.occupancy[v])]
        if sorted(order) != sorted(v for v in range(config.n) for _ in range(config.occupancy[v])):
            raise ValueError("robot order does not match the configuration")
        robots = tuple(Robot(v) for v in order)
        return cls(config, robots, ages=(0,) * len(robots),
                   first_single_1block_seen=past_first_block(config))

    @property
    def k(self) -> int:
        return len(self.robots)

    def quiescent(self) -> bool:
        return all(r.pending is None or r.pending.intent is None for r in self.robots)

    def terminal(self) -> bool:
        return is_gathered(self.config) and self.quiescent()

    def valid_actions(self) -> list[SchedulerAction]:
        out = []
        for i, r in enumerate(self.robots):
            if r.pending is None:
                out.append(SchedulerAction(i, LOOK))
            elif r.pending.intent is not None and r.pending.intent.is_choice:
                for t in r.pending.intent.targets:
                    out.append(SchedulerAction(i, MOVE, t))
            else:
                out.append(SchedulerAction(i, MOVE))
        return out

    def reported_rounds(self) -> int:
        return self.rounds + (1 if self.completed else 0)


def step(state: ExecutionState, action: SchedulerAction) -> tuple[ExecutionState, TraceEvent]:
    """Apply one scheduler action; raises ProtocolViolation from ``decide``."""
    if not 0 <= action.robot < state.k:
        raise SchedulerContractError(f"no robot {action.robot}")
    robot = state.robots[action.robot]
    config = state.config
    ages = list(state.ages) if state.ages else [0] * state.k
    completed = state.completed

    if action.kind == LOOK:
        if robot.pending is not None:
            raise SchedulerContractError(f"robot {action.robot} is not ready")
        plan = protocol_plan(config.pattern)
        intent = decide(config, robot.position, config.is_tower(robot.position))
        pending = Pending(intent, state.step, plan.phase, plan.label)
        robots = _replace_robot(state.robots, action.robot, Robot(robot.position, pending))
        new_config = config
        event_kind = LOOK
        phase, label = plan.phase, plan.label
        intent_text = str(intent) if intent else "stay"
        done = False
    elif action.kind == MOVE:
        if robot.pending is None:
            raise SchedulerContractError(f"robot {action.robot} has no pending intent")
        intent = robot.pending.intent
        if intent is None:
            target = robot.position
        elif intent.is_choice:
            if action.choice not in intent.targets:
                raise SchedulerContractError(f"choice {action.choice} not in {intent.targets}")
            target = action.choice
        else:
            target = intent.targets[0]
        new_config = config if target == robot.position else config.move(robot.position, target)
        robots = _replace_robot(state.robots, action.robot, Robot(target))
        event_kind = "stay" if target == robot.position else MOVE
        phase, label = robot.pending.phase, robot.pending.label
        intent_text = None if intent is None else f"{robot.position}->{target}"
        done = True
    else:
        raise SchedulerContractError(f"unknown action kind {action.kind!r}")

    rounds = state.rounds
    for i in range(state.k):
        ages[i] += 1
    if done:
        ages[action.robot] = 0
        completed = completed | {action.robot}
        if len(completed) == state.k:
            rounds += 1
            completed = frozenset()
    seen = state.first_single_1block_seen or is_single_block(new_config.pattern)
    new_state = ExecutionState(new_config, robots, state.step + 1, rounds, completed,
                               tuple(ages), seen)
    event = TraceEvent(state.step, action.robot, event_kind, phase, label, config, new_config,
                       intent_text)
    return new_state, event


def apply(state: ExecutionState, action: SchedulerAction) -> ExecutionState:
    return step(state, action)[0]


def _replace_robot(robots: tuple[Robot, ...], i: int, robot: Robot) -> tuple[Robot, ...]:
    return robots[:i] + (robot,) + robots[i + 1:]


# -- safety monitors ------------------------------------------------------------

def safety_violations(state: ExecutionState) -> list[str]:
    """Ground-truth safety checks on a reached state."""
    config = state.config
    out = []
    if config.towers and not state.first_single_1block_seen:
        out.append("P1: tower before the first single 1.block")
    if is_periodic(config.pattern):
        out.append("P2: periodic configuration")
    cls = phase2.classify_csp(config)
    if cls is not None and cls.v_t is not None and not is_gathered(config):
        stray = [v for v in config.towers if v != cls.v_t]
        if stray:
            out.append(f"P4: tower at {stray} outside v_t={cls.v_t} in {cls.label}")
    return out


# -- driving a run --------------------------------------------------------------

@dataclass
class RunResult:
    outcome: str
    rounds: int
    steps: int
    trace: list[TraceEvent]
    transcript: list[SchedulerAction]
    final: ExecutionState
    violation: str | None = None
    stale_csp_entry: bool = False  # a phase-1 intent was pending when C_sp was entered

    def summary(self) -> str:
        line = f"outcome={self.outcome} rounds={self.rounds} steps={self.steps}"
        if self.violation:
            line += f" violation={self.violation!r}"
        if self.stale_csp_entry:
            line += " stale_csp_entry=yes"
        return line


def run(initial: Configuration, scheduler, max_rounds: int | None = None,
        seed: int | None = None, order: Sequence[int] | None = None,
        keep_trace: bool = True, check_fairness: bool = True) -> RunResult:
    """Drive ``scheduler`` from ``initial`` until gathering, a violation or the
    round limit (default 10 n^2). ``seed`` reseeds the scheduler if given."""
    if max_rounds is None:
        max_rounds = 10 * initial.n ** 2
    if seed is not None and hasattr(scheduler, "reseed"):
        scheduler.reseed(seed)
    state = ExecutionState.initial(initial, order)
    if hasattr(scheduler, "reset"):
        scheduler.reset(state)
    trace: list[TraceEvent] = []
    transcript: list[SchedulerAction] = []
    stale_entry = False
    bound = getattr(scheduler, "fairness_bound", None) if check_fairness else None

    found = safety_violations(state)
    if found:
        return RunResult(VIOLATION, 0, 0, trace, transcript, state, found[0])
    while not state.terminal():
        if state.rounds >= max_rounds:
            return RunResult(ROUND_LIMIT, state.rounds, state.step, trace, transcript, state,
                             stale_csp_entry=stale_entry)
        action = scheduler.choose(state)
        was_csp = protocol_plan(state.config.pattern).phase == 2
        try:
            state, event = step(state, action)
        except ProtocolViolation as exc:
            transcript.append(action)
            return RunResult(VIOLATION, state.reported_rounds(), state.step, trace, transcript,
                             state, f"P3: {exc}", stale_entry)
        transcript.append(action)
        if keep_trace:
            trace.append(event)
        if hasattr(scheduler, "observe"):
            scheduler.observe(state, action, event)
        if bound is not None and max(state.ages) >= bound:
            starved = state.ages.index(max(state.ages))
            raise SchedulerContractError(
                f"robot {starved} did not complete a cycle within {bound} steps")
        if not was_csp and protocol_plan(state.config.pattern).phase == 2:
            if any(r.pending is not None and r.pending.intent is not None and r.pending.phase == 1
                   for r in state.robots):
                stale_entry = True
        found = safety_violations(state)
        if found:
            return RunResult(VIOLATION, state.reported_rounds(), state.step, trace, transcript,
                             state, found[0], stale_entry)
    return RunResult(GATHERED, state.reported_rounds(), state.step, trace, transcript, state,
                     stale_csp_entry=stale_entry)


def replay(initial: Configuration, transcript: Iterable[SchedulerAction],
           order: Sequence[int] | None = None) -> list[TraceEvent]:
    state = ExecutionState.initial(initial, order)
    events = []
    for action in transcript:
        state, event = step(state, action)
        events.append(event)
    return events


def write_trace(events: Iterable[TraceEvent], fh: IO[str]) -> None:
    for e in events:
        fh.write(e.to_json() + "\n")
