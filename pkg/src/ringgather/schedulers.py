"""Built-in scheduler policies.

A scheduler exposes ``choose(state) -> SchedulerAction`` and a
``fairness_bound`` (or ``None``). All randomness comes from a
``random.Random`` seeded explicitly; Python guarantees the Mersenne Twister
sequence for a given integer seed across versions and platforms.
"""

from __future__ import annotations

import random

from .executor import (
    LOOK,
    MOVE,
    ExecutionState,
    SchedulerAction,
    protocol_plan,
)

GENERATOR = "python-random-mt19937"


def fair_feasible(ages, work, bound: int) -> bool:
    """Can every robot still finish its current cycle in time?

    ``work[i]`` steps are left in robot i's cycle and it has ``bound - ages[i]``
    steps to do them. Earliest-deadline-first decides feasibility.
    """
    jobs = sorted((bound - a, w) for a, w in zip(ages, work))
    used = 0
    for deadline, w in jobs:
        used += w
        if used > deadline:
            return False
    return True


def _work(state: ExecutionState) -> list[int]:
    return [2 if r.pending is None else 1 for r in state.robots]


def feasible_actions(state: ExecutionState, bound: int) -> list[SchedulerAction]:
    """Actions after which the F-bounded fairness obligation can still be met."""
    ages = list(state.ages)
    work = _work(state)
    out = []
    for action in state.valid_actions():
        i = action.robot
        new_ages = [a + 1 for a in ages]
        new_work = list(work)
        if action.kind == MOVE:
            new_ages[i] = 0
            new_work[i] = 2
        else:
            new_work[i] = 1
        if fair_feasible(new_ages, new_work, bound):
            out.append(action)
    return out


class RoundRobin:
    """Robots take full cycles in index order; ``synchronous`` makes every
    robot look before anyone moves."""

    def __init__(self, synchronous: bool = False):
        self.synchronous = synchronous
        self.fairness_bound = None
        self._queue: list[SchedulerAction] = []

    def reset(self, state: ExecutionState) -> None:
        self._queue = []
        self.fairness_bound = 2 * state.k

    def choose(self, state: ExecutionState) -> SchedulerAction:
        if not self._queue:
            k = state.k
            if self.synchronous:
                self._queue = [SchedulerAction(i, LOOK) for i in range(k)]
                self._queue += [SchedulerAction(i, MOVE) for i in range(k)]
            else:
                for i in range(k):
                    self._queue += [SchedulerAction(i, LOOK), SchedulerAction(i, MOVE)]
        action = self._queue.pop(0)
        if action.kind == MOVE:
            intent = state.robots[action.robot].pending.intent
            if intent is not None and intent.is_choice:
                action = SchedulerAction(action.robot, MOVE, intent.targets[0])
        return action


class RandomFair:
    """Uniformly random valid actions under F-bounded fairness (default 3k)."""

    def __init__(self, seed: int = 0, bound: int | None = None):
        self.seed = seed
        self.bound = bound
        self.fairness_bound = bound
        self.rng = random.Random(seed)

    def reseed(self, seed: int) -> None:
        self.seed = seed
        self.rng = random.Random(seed)

    def reset(self, state: ExecutionState) -> None:
        self.fairness_bound = self.bound if self.bound is not None else 3 * state.k
        if self.fairness_bound < 2 * state.k:
            raise ValueError(f"fairness bound {self.fairness_bound} < 2k = {2 * state.k}")

    def _candidates(self, state: ExecutionState) -> list[SchedulerAction]:
        return feasible_actions(state, self.fairness_bound)

    def choose(self, state: ExecutionState) -> SchedulerAction:
        return self.rng.choice(self._candidates(state))


class AdversarialSplit(RandomFair):
    """Whenever two robots are told to move, let the first one look and then
    hold back its move as long as the fairness bound allows."""

    def __init__(self, seed: int = 0, bound: int | None = None):
        super().__init__(seed, bound)
        self.held: set[int] = set()

    def reset(self, state: ExecutionState) -> None:
        super().reset(state)
        self.held = set()

    def choose(self, state: ExecutionState) -> SchedulerAction:
        cands = self._candidates(state)
        free = [a for a in cands if not (a.kind == MOVE and a.robot in self.held)]
        return self.rng.choice(free or cands)

    def observe(self, state: ExecutionState, action: SchedulerAction, event) -> None:
        if action.kind == MOVE:
            self.held.discard(action.robot)
            return
        pending = state.robots[action.robot].pending
        if pending.intent is None:
            return
        plan = protocol_plan(event.before.pattern)
        pending_movers = [i for i in self.held if state.robots[i].pending is not None]
        if len(plan.moves) == 2 and not pending_movers:
            self.held.add(action.robot)


class Starve:
    """Deliberately unfair stub: robot ``victim`` is never scheduled."""

    def __init__(self, victim: int = 0, bound: int | None = None):
        self.victim = victim
        self.bound = bound
        self.fairness_bound = bound

    def reset(self, state: ExecutionState) -> None:
        self.fairness_bound = self.bound if self.bound is not None else 3 * state.k

    def choose(self, state: ExecutionState) -> SchedulerAction:
        for a in state.valid_actions():
            if a.robot != self.victim:
                return a
        raise RuntimeError("nothing to schedule")


SCHEDULERS = {
    "round_robin": lambda seed, bound: RoundRobin(),
    "synchronous": lambda seed, bound: RoundRobin(synchronous=True),
    "random_fair": lambda seed, bound: RandomFair(seed, bound),
    "adversarial_split": lambda seed, bound: AdversarialSplit(seed, bound),
}


def make_scheduler(name: str, seed: int = 0, bound: int | None = None):
    try:
        return SCHEDULERS[name](seed, bound)
    except KeyError:
        raise ValueError(f"unknown scheduler {name!r}; choose from {sorted(SCHEDULERS)}") from None
