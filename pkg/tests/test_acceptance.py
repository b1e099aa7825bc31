"""The seven acceptance criteria, each reported as one PASS/FAIL line."""

import json
import random
import time

import oracles
from acceptance_log import record
from ringgather.checker import enumerate_initials, explore_many
from ringgather.cli import main
from ringgather.executor import ExecutionState, SchedulerAction, replay, run
from ringgather.lemmas import ROUND_BOUND, gathering_constant, lemma_suite
from ringgather.observation import view_at
from ringgather.ring_core import (
    Configuration,
    SymmetryKind,
    classify_symmetry,
    d_blocks,
    holes,
    node_blocks,
    random_configuration,
)
from ringgather.schedulers import AdversarialSplit, RandomFair


def test_criterion_1_exhaustive_model_check():
    instances = [(8, 3), (9, 3), (10, 3), (10, 5), (11, 5)]
    ok, parts = True, []
    for n, k in instances:
        initials = enumerate_initials(n, k)
        limit = 10 * n * n
        # every weakly fair interleaving; this contains every F-bounded one
        runs = [("weak", explore_many(initials, round_limit=limit))]
        if k == 3:
            # the exact F = 3k state space is small enough here
            runs.append((f"F={3 * k}", explore_many(initials, bound=3 * k, round_limit=limit)))
        for mode, v in runs:
            good = (v.ok and not v.violations and len(v.per_instance_rounds) == len(initials)
                    and max(v.per_instance_rounds.values()) <= limit)
            ok &= good
            parts.append(f"({n},{k}) {mode}: {len(initials)} initials, {v.states_explored} states, "
                         f"max {v.max_rounds_observed} rounds, {len(v.violations)} violations")
    record(1, "exhaustive model check", ok, "; ".join(parts))
    assert ok


def test_criterion_2_lemma_transitions():
    verdict, results = lemma_suite(9)
    c = gathering_constant(results)
    worst = max(r.transition_rounds for r in results)
    ks = sorted({r.k for r in results})
    entry = {r.k: r.gathering_rounds for r in results if r.source == f"C_sb({r.k})"}
    measured = sum(r.gathering_rounds is not None for r in results)
    ok = (verdict.ok and all(r.ok for r in results) and worst <= ROUND_BOUND
          and ks == [3, 5, 7, 9] and all(entry.get(k) is not None for k in ks))
    record(2, "phase-2 transition suite", ok,
           f"{len(results)} instances (k in {ks}, n = k+5, towered and tower-free), "
           f"max {worst} rounds per transition, worst gathering from C_sb(k) {entry}, "
           f"c = {c:.3f} over {measured} measured seeds, {len(verdict.violations)} violations")
    assert ok, verdict.text()


def test_criterion_3_oracle_equivalence():
    mismatches, lemma1, patterns = 0, 0, 0
    for pattern in oracles.all_patterns(12):
        patterns += 1
        n = len(pattern)
        c = Configuration(n, tuple(int(p) for p in pattern))
        mismatches += [(h.start, h.size) for h in holes(c)] != oracles.holes(pattern)
        mismatches += sorted((b.start, b.size) for b in node_blocks(c)) != oracles.node_blocks(pattern)
        if sum(pattern) >= 2:
            d, blocks, iso = d_blocks(c)
            mismatches += (d, sorted(b.members for b in blocks), iso) != oracles.d_blocks(pattern)
        kind, fix = oracles.symmetry(pattern)
        sym = classify_symmetry(c)
        mismatches += sym.kind != kind
        if kind == "symmetric":
            mismatches += sym.reflection % n not in fix
        groups = {}
        for v in c.occupied:
            got = view_at(c, v)
            mismatches += (got.sequence, got.symmetric) != oracles.view(pattern, v)
            groups.setdefault(got.sequence, []).append(v)
        if sym.kind == SymmetryKind.RIGID:
            lemma1 += any(len(g) > 1 for g in groups.values())
        elif sym.kind == SymmetryKind.SYMMETRIC:
            lemma1 += any(len(g) > 2 for g in groups.values())
    ok = mismatches == 0 and lemma1 == 0
    record(3, "oracle equivalence (n <= 12)", ok,
           f"{patterns} patterns, {mismatches} mismatches, {lemma1} view-distinctness exceptions")
    assert ok


def test_criterion_4_scaling(tmp_path):
    report, data = tmp_path / "stats.json", tmp_path / "stats.csv"
    t0 = time.perf_counter()
    rc = main(["stats", "--n", "12,24,48", "--k", "5", "--seeds", "50",
               "--scheduler", "random_fair", "--data", str(data), "--report", str(report)])
    elapsed = time.perf_counter() - t0
    summary = json.loads(report.read_text())
    rows = summary["summary"]
    exponent = summary["exponent"]
    ok = (rc == 0 and all(r["gathered"] == r["runs"] == 50 for r in rows)
          and exponent <= 2.3 and all(r["max_rounds"] < r["limit"] for r in rows)
          and elapsed < 600)
    table = ", ".join(f"n={r['n']}: mean {r['mean_rounds']:.1f} max {r['max_rounds']}" for r in rows)
    record(4, "scaling", ok, f"{table}; exponent {exponent:.3f}; {elapsed:.1f}s")
    assert ok


def _mapped_actions(transcript, f, perm_inverse=None):
    out = []
    for a in transcript:
        robot = a.robot if perm_inverse is None else perm_inverse[a.robot]
        choice = None if a.choice is None else f(a.choice)
        out.append(SchedulerAction(robot, a.kind, choice))
    return out


def test_criterion_5_metamorphic():
    failures, choices = 0, 0
    for i in range(1000):
        rng = random.Random(i)
        k = rng.choice([3, 5, 7])
        n = rng.randint(k + 4, 16)
        c = random_configuration(n, k, rng)
        sched = AdversarialSplit(i) if i % 2 else RandomFair(i)
        res = run(c, sched)
        choices += sum(a.choice is not None for a in res.transcript)
        base = [r.position for r in ExecutionState.initial(c).robots]

        # rotation or reflection of instance and transcript
        x = rng.randrange(2 * n)
        if rng.random() < 0.5:
            def f(v):
                return (v + x) % n
            image = c.rotate(x)

            def g(cfg):
                return cfg.rotate(x)
        else:
            def f(v):
                return (x - v) % n
            image = c.reflect(x)

            def g(cfg):
                return cfg.reflect(x)
        mapped = replay(image, _mapped_actions(res.transcript, f), [f(v) for v in base])
        if [(m.before, m.after, m.kind, m.robot, m.label) for m in mapped] != \
                [(g(e.before), g(e.after), e.kind, e.robot, e.label) for e in res.trace]:
            failures += 1

        # renumbering the robots
        perm = list(range(k))
        rng.shuffle(perm)
        inverse = {old: new for new, old in enumerate(perm)}
        renamed = replay(c, _mapped_actions(res.transcript, lambda v: v, inverse),
                         [base[p] for p in perm])
        if [(e.before, e.after) for e in renamed] != [(e.before, e.after) for e in res.trace]:
            failures += 1
    ok = failures == 0
    record(5, "anonymity / symmetry metamorphic suite", ok,
           f"1000 (instance, schedule) pairs, {choices} scheduler direction choices, "
           f"{failures} exceptions")
    assert ok


def test_criterion_6_enumeration():
    got = enumerate_initials(8, 3)
    brute = oracles.orbit_count_brute(8, 3)
    burnside = oracles.bracelet_count_burnside(8, 3)
    ok = len(got) == 5 == brute == burnside
    record(6, "enumeration", ok,
           f"enumerate_initials(8,3) = {len(got)}, orbit oracle = {brute}, Burnside = {burnside}")
    assert ok


def test_criterion_7_negative_monitors(tmp_path, capsys):
    tower_report = tmp_path / "tower.json"
    rc_tower = main(["simulate", "--n", "12", "--k", "5", "--initial", "0*2,1,5,8",
                     "--report", str(tower_report)])
    tower = json.loads(tower_report.read_text())["runs"][0]
    rc_check = main(["check", "--n", "12", "--k", "5", "--initial", "0*2,1,5,8"])
    starve_report = tmp_path / "starve.json"
    rc_starve = main(["simulate", "--n", "10", "--k", "5", "--initial", "0,1,2,5,7",
                      "--scheduler", "starve", "--report", str(starve_report)])
    starve = json.loads(starve_report.read_text())["runs"][0]
    ok = (rc_tower == 1 and tower["violation"].startswith("P1") and rc_check == 1
          and rc_starve == 1 and "unfair scheduler" in starve["violation"])
    record(7, "negative monitors", ok,
           f"illegal tower: simulate exit {rc_tower} ({tower['violation']}), check exit {rc_check}; "
           f"unfair stub: exit {rc_starve} ({starve['violation']})")
    assert ok
