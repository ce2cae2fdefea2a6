"""Acceptance suite: every criterion at its stated tolerance and time budget.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion.
"""

import hashlib
import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from tracksim.allocation import Assignment, verify_assignment
from tracksim.backends import FaultyBackend, MockBackend
from tracksim.errors import TracksimError
from tracksim.estimation import (
    Measurement,
    SensorModel,
    TargetBelief,
    fuse_team,
    kf_predict,
    kf_update,
)
from tracksim.experiments import ablation, sweep_success
from tracksim.llm import token_budget
from tracksim.runner import load_human_script, run_scenario
from tracksim.scenario import load_scenario
from tracksim.solver import WeightVector, eliminate_slacks, objective, solve_step
from tracksim.world import DangerZone, RobotState, WorldConfig, Workspace

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def report(name: str, ok: bool, detail: str = ""):
    tag = "PASS" if ok else "FAIL"
    line = f"[{tag}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def random_spd(rng, n=4):
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.2 * np.eye(n)


def test_beta_verifier_exactness():
    rng = np.random.default_rng(0)
    started = time.monotonic()
    mismatches = 0
    for _ in range(1000):
        m = int(rng.integers(1, 9))
        n = int(rng.integers(1, 9))
        mat = rng.integers(0, 2, size=(m, n))
        caps = rng.integers(1, 5, size=m)
        a = Assignment.from_array(mat, list(range(m)), list(range(n)))
        oracle = 0.0
        for i in range(m):
            row = int(mat[i].sum())
            if row > caps[i]:
                oracle += row - caps[i]
        for j in range(n):
            if mat[:, j].sum() < 1:
                oracle += 1 - int(mat[:, j].sum())
        if verify_assignment(a, caps) != oracle:
            mismatches += 1
    elapsed = time.monotonic() - started
    report(
        "beta-verifier exactness: 1000 random instances vs brute force",
        mismatches == 0 and elapsed < 1.0,
        f"{mismatches} mismatches, {elapsed:.2f}s",
    )


def test_slack_elimination_equivalence():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 4))
        zones = [
            DangerZone(i + 1, "sensing", tuple(rng.uniform(-3, 3, 2)),
                       float(rng.uniform(0.5, 2.5)), 0.5, 10)
            for i in range(k)
        ]
        pos = rng.uniform(-4, 4, 2)
        margin = float(rng.uniform(0, 0.5))
        nu = eliminate_slacks(pos, zones, margin)
        bodies = [
            (z.radius + margin) ** 2 - z.distance(pos) ** 2
            for z in sorted(zones, key=lambda z: z.id)
        ]
        # brute-force per-coordinate refining grid over the feasible rays
        coords = []
        for g in bodies:
            lo, hi = 0.0, abs(g) + 1.0
            val = hi
            for _ in range(4):
                grid = np.linspace(lo, hi, 500)
                feasible = grid[(grid >= 0.0) & (grid >= g)]
                val = float(feasible[0])
                width = (hi - lo) / 499
                lo, hi = max(0.0, val - width), val + width
            coords.append(val)
        worst = max(worst, abs(float(np.linalg.norm(nu)) - float(np.linalg.norm(coords))))
    report(
        "slack elimination equals brute-force slack minimum on 100 instances",
        worst <= 1e-6,
        f"worst gap {worst:.2e}",
    )


def test_kalman_properties():
    rng = np.random.default_rng(2)
    trace_ok = True
    for _ in range(1000):
        b = TargetBelief(1, rng.normal(size=4), random_spd(rng) * float(rng.uniform(0.1, 5)))
        noise = random_spd(rng, 2) + 0.01 * np.eye(2)
        out = kf_update(b, rng.normal(size=2), noise)
        if out.trace > b.trace + 1e-12:
            trace_ok = False

    z = np.array([0.4, -0.2])
    base = TargetBelief(1, np.zeros(4), np.eye(4))
    robots = [RobotState(id=i, position=np.zeros(2), capacity=1) for i in (1, 2, 3)]
    k = 3
    many = fuse_team(
        {1: base},
        [Measurement(i, 1, (z[0], z[1]), ((0.6, 0.0), (0.0, 0.6))) for i in (1, 2, 3)],
        robots,
        1,
    )
    one = fuse_team(
        {1: base},
        [Measurement(1, 1, (z[0], z[1]), ((0.6 / k, 0.0), (0.0, 0.6 / k)))],
        robots,
        1,
    )
    additivity_gap = abs(many[1].trace - one[1].trace)
    mean_gap = float(np.abs(many[1].mean - one[1].mean).max())

    b = TargetBelief(1, np.zeros(4), random_spd(np.random.default_rng(3)))
    rng2 = np.random.default_rng(4)
    for _ in range(300):
        b = kf_predict(b, 0.1, 0.01)
        b = kf_update(b, rng2.normal(size=2), (0.05 + rng2.random()) * np.eye(2))
    drift = float(np.abs(b.covariance - b.covariance.T).max())

    report(
        "kalman: monotone trace, information additivity, symmetry drift",
        trace_ok and additivity_gap <= 1e-9 and mean_gap <= 1e-9 and drift <= 1e-9,
        f"additivity {additivity_gap:.1e}, mean {mean_gap:.1e}, drift {drift:.1e}",
    )


def test_solver_quality():
    ws = Workspace(-50, -50, 50, 50)
    cfg = WorldConfig(ws, dt=0.2, u_max=1.0, rng_seed=0)
    sensor = SensorModel(0.1, 0.3, max_range=5.0)
    rng = np.random.default_rng(5)

    def random_instance():
        beliefs = [
            TargetBelief(i + 1, np.r_[rng.uniform(-2, 2, 2), rng.uniform(-0.4, 0.4, 2)],
                         random_spd(rng))
            for i in range(int(rng.integers(0, 3)))
        ]
        zones = (
            [DangerZone(1, "sensing", tuple(rng.uniform(-1.5, 1.5, 2)),
                        float(rng.uniform(0.5, 1.5)), 0.5, 10)]
            if rng.random() < 0.7
            else []
        )
        robot = RobotState(id=1, position=rng.uniform(-1, 1, 2), capacity=2)
        weights = WeightVector(*rng.uniform(0.1, 5.0, 4))
        return robot, beliefs, zones, weights

    gap_ok, descent_ok = True, True
    worst_gap = -np.inf
    for _ in range(20):
        robot, beliefs, zones, weights = random_instance()
        rep = solve_step(robot, beliefs, zones, weights, sensor, cfg, q=0.01, margin=0.2)
        if rep.objective_value > rep.objective_at_zero + 1e-12:
            descent_ok = False
        best = objective(np.zeros(2), robot, beliefs, zones, weights, sensor, cfg,
                         q=0.01, margin=0.2)
        for deg in range(360):
            angle = math.radians(deg)
            direction = np.array([math.cos(angle), math.sin(angle)])
            for radius in np.linspace(1.0 / 50, 1.0, 50):
                val = objective(radius * direction, robot, beliefs, zones, weights,
                                sensor, cfg, q=0.01, margin=0.2)
                if val < best:
                    best = val
        worst_gap = max(worst_gap, rep.objective_value - best)
        if rep.objective_value > best + 1e-3:
            gap_ok = False

    scale_ok = True
    worst_scale = 0.0
    for i in range(50):
        rng_i = np.random.default_rng(100 + i)
        robot, beliefs, zones, weights = random_instance()
        lam = (0.1, 3.0, 10.0)[i % 3]
        a = solve_step(robot, beliefs, zones, weights, sensor, cfg, q=0.01, margin=0.2)
        b = solve_step(robot, beliefs, zones, weights.scaled(lam), sensor, cfg,
                       q=0.01, margin=0.2)
        du = math.hypot(a.control[0] - b.control[0], a.control[1] - b.control[1])
        worst_scale = max(worst_scale, du)
        if du > 1e-6 * cfg.u_max:
            scale_ok = False

    report(
        "solver: grid-oracle gap <= 1e-3, descent, weight-scale invariance",
        gap_ok and descent_ok and scale_ok,
        f"worst gap {worst_gap:.2e}, worst scale shift {worst_scale:.2e}",
    )


def test_token_budget_formula():
    expected_base = {1: 150, 1.5: 175, 2: 200, 3: 250, 4: 300}
    ok = all(token_budget(c, "base") == v for c, v in expected_base.items())
    ok = ok and all(token_budget(c, "rich") == v + 200 for c, v in expected_base.items())
    ok = ok and all(isinstance(token_budget(c, m), int)
                    for c in expected_base for m in ("base", "rich"))
    report("token budget reproduces 50*(mean capacity + 2) and +200 rich", ok)


def test_success_rate_calibration():
    started = time.monotonic()
    mock_cells = sweep_success(
        range(2, 9), range(2, 9), lambda: MockBackend(), queries_per_cell=10
    )
    mock_ok = all(c.task_rate == 1.0 and c.action_rate == 1.0 for c in mock_cells)

    sub_started = time.monotonic()
    faulty_cells = sweep_success(
        [2, 5, 8], [2, 5, 8],
        lambda: FaultyBackend(0.3, seed=17),
        queries_per_cell=500,
    )
    sub_elapsed = time.monotonic() - sub_started
    band_ok = all(
        0.65 <= c.task_rate <= 0.75 and 0.65 <= c.action_rate <= 0.75
        for c in faulty_cells
    )
    report(
        "success-rate calibration: mock 100% on 7x7, faulty(0.3) in [0.65, 0.75]",
        mock_ok and band_ok and sub_elapsed < 120.0,
        f"grid {len(mock_cells)} cells, faulty sub-grid {sub_elapsed:.1f}s, "
        f"total {time.monotonic() - started:.1f}s",
    )


def test_ablation_ordering():
    started = time.monotonic()
    scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
    script = load_human_script(SCENARIO_DIR / "ablation_human.txt")
    result = ablation(
        scenario,
        seeds=list(range(10)),
        backend_factory=lambda: MockBackend(),
        steps=300,
        human_script=script,
    )
    elapsed = time.monotonic() - started
    tr = {m: result.means[m]["accumulated_trace"] for m in result.means}
    sa = {m: result.means[m]["sensing_attacks"] for m in result.means}
    trace_ok = tr["llm_human"] <= tr["llm"] <= tr["no_llm"]
    attacks_ok = sa["llm_human"] <= sa["no_llm"]
    report(
        "ablation ordering over 10 seeds: trace llm_human <= llm <= no_llm, "
        "sensing attacks llm_human <= no_llm",
        trace_ok and attacks_ok and elapsed < 300.0,
        f"trace {tr['llm_human']:.1f}/{tr['llm']:.1f}/{tr['no_llm']:.1f}, "
        f"sensing {sa['llm_human']:.2f}/{sa['no_llm']:.2f}, {elapsed:.0f}s",
    )


def test_determinism_hash_equality(tmp_path):
    started = time.monotonic()
    scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
    digests = []
    for name in ("one.jsonl", "two.jsonl"):
        log = tmp_path / name
        run_scenario(scenario, "llm", steps=300, backend=MockBackend(), seed=11,
                     log_path=log)
        digests.append(hashlib.sha256(log.read_bytes()).hexdigest())
    elapsed = time.monotonic() - started
    report(
        "determinism: identical 300-step runs give byte-identical logs",
        digests[0] == digests[1] and elapsed < 30.0,
        f"sha256 {digests[0][:12]}..., {elapsed:.1f}s for both runs",
    )


def test_safety_responsiveness():
    scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
    high = run_scenario(
        scenario.with_weights(WeightVector(1, 1, 10, 10)), "no_llm", steps=300,
        backend=MockBackend(), seed=0,
    )
    low = run_scenario(
        scenario.with_weights(WeightVector(1, 1, 0.1, 0.1)), "no_llm", steps=300,
        backend=MockBackend(), seed=0,
    )
    report(
        "safety responsiveness: (1,1,10,10) strictly fewer incursion steps "
        "than (1,1,0.1,0.1)",
        high.sensing_incursion_steps < low.sensing_incursion_steps,
        f"{high.sensing_incursion_steps} < {low.sensing_incursion_steps}",
    )


def test_skip_policy_liveness(tmp_path):
    import json

    scenario = load_scenario(SCENARIO_DIR / "ablation.yaml")
    log = tmp_path / "faulty.jsonl"
    try:
        metrics = run_scenario(
            scenario, "llm", steps=300, backend=FaultyBackend(1.0, seed=23),
            seed=3, log_path=log,
        )
    except TracksimError as exc:
        report("skip-policy liveness under faulty(1.0)", False, f"crashed: {exc}")
        return
    bounds = scenario.bounds
    weights_ok, incumbent_ok = True, True
    for line in log.read_text().splitlines():
        rec = json.loads(line)
        if rec["type"] != "step":
            continue
        w = rec["weights"]
        if not all(lo <= v <= hi for v, lo, hi in zip(w, bounds.lo, bounds.hi)):
            weights_ok = False
        if rec["assignment"]["epoch"] != 0:
            incumbent_ok = False  # nothing was ever accepted, so epoch stays 0
    report(
        "skip-policy liveness: faulty(1.0) full run keeps greedy incumbent "
        "and in-bounds weights",
        metrics.steps == 300 and weights_ok and incumbent_ok,
        f"{metrics.steps} steps, task rate {metrics.task_success_rate}",
    )
