"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Criterion 7's separability clause is implemented faithfully and is
expected to fail at the default parameters; the measured evidence and root
cause are documented in the failure message.
"""

import filecmp
import time

import numpy as np
import pytest

from oracles import all_assignments, brute_force_satisfied

from hoqiga.algorithms import (
    Qiga1Config,
    QigaConfig,
    SgaConfig,
    contraction_update,
    qiga1_evolve,
    qiga_evolve,
    sga_evolve,
)
from hoqiga.cli import main as cli_main
from hoqiga.core import QuantumRegister, RandomSource, observe_register_many, register_uniform
from hoqiga.harness import (
    AlgorithmSpec,
    ExperimentPlan,
    ProblemSpec,
    rank_algorithms,
    run_experiment,
)
from hoqiga.problems import MaxSat, generate_uniform_3sat, onemax
from hoqiga.theory import log2_quantum_factor, quantum_factor

scipy_stats = pytest.importorskip("scipy.stats")


def report(number: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[criterion {number}] {name}: {status}{suffix}")


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_1_theory_exactness():
    with Stopwatch() as clock:
        checks = [abs(quantum_factor(1, 10) - 0.01953125) <= 1e-12]
        checks += [quantum_factor(n, n) == 1.0 for n in range(1, 41)]
        checks.append(quantum_factor(1, 50) < 1e-10)
        checks += [
            log2_quantum_factor(1, n) == log2_quantum_factor(2, n) for n in range(2, 41)
        ]
    ok = all(checks) and clock.elapsed < 1.0
    report(1, "theory exactness", ok, f"{clock.elapsed:.3f}s")
    assert all(checks)
    assert clock.elapsed < 1.0


def test_criterion_2_contraction_closed_form():
    with Stopwatch() as clock:
        mu, t, best = 0.99, 100, 2
        reg = register_uniform(2)
        for _ in range(t):
            reg = contraction_update(reg, best, mu)
        expected = 0.5 * mu**t
        non_best = np.delete(reg.amplitudes, best)
        amp_ok = bool(np.all(np.abs(non_best - expected) <= 1e-12))
        norm_ok = abs(float(np.sum(reg.amplitudes**2)) - 1.0) <= 1e-9
    ok = amp_ok and norm_ok and clock.elapsed < 1.0
    report(2, "contraction closed form", ok, f"{clock.elapsed:.3f}s")
    assert amp_ok and norm_ok
    assert clock.elapsed < 1.0


def test_criterion_3_observation_law():
    draws = 100_000
    with Stopwatch() as clock:
        passed = 0
        index = 0
        for order in (1, 2, 3, 4):
            for _ in range(25):
                gen = RandomSource(1_000 + index)
                amps = gen.gen.normal(size=2**order)
                reg = QuantumRegister(order, amps / np.sqrt(np.sum(amps**2)))
                outcomes = observe_register_many(reg, draws, RandomSource(5_000 + index))
                observed = np.bincount(outcomes, minlength=2**order)
                _, p = scipy_stats.chisquare(observed, f_exp=draws * reg.probabilities)
                passed += p >= 0.001
                index += 1
    ok = passed >= 99 and clock.elapsed < 30.0
    report(3, "observation law", ok, f"{passed}/100 registers, {clock.elapsed:.1f}s")
    assert passed >= 99
    assert clock.elapsed < 30.0


def test_criterion_4_maxsat_oracle_equivalence():
    with Stopwatch() as clock:
        mismatches = 0
        for i in range(50):
            n = 4 + i % 9  # sizes 4..12
            formula = generate_uniform_3sat(n, round(4.3 * n), RandomSource(9_000 + i))
            problem = MaxSat(formula)
            assignments = np.array(list(all_assignments(n)))
            fast = problem.batch(assignments)
            for bits, value in zip(assignments, fast):
                if value != brute_force_satisfied(formula, bits):
                    mismatches += 1
    ok = mismatches == 0 and clock.elapsed < 60.0
    report(4, "maxsat oracle equivalence", ok, f"{clock.elapsed:.1f}s")
    assert mismatches == 0
    assert clock.elapsed < 60.0


def test_criterion_5_protocol_fidelity():
    problem = onemax(16)
    runs = [
        qiga_evolve(problem, QigaConfig(), RandomSource(0)),
        qiga_evolve(problem, QigaConfig(order=3), RandomSource(0)),
        qiga1_evolve(problem, Qiga1Config(), RandomSource(0)),
        sga_evolve(problem, SgaConfig(), RandomSource(0)),
    ]
    budgets_ok = all(r.evaluations == 5000 and len(r.trajectory) == 5000 for r in runs)

    plan = ExperimentPlan(
        problems=(ProblemSpec("om12", "onemax:12"),),
        algorithms=(AlgorithmSpec("qiga2"), AlgorithmSpec("sga")),
        runs_per_cell=50,
        base_seed=424242,
        max_fitness_evaluations=5000,
    )
    first, second = run_experiment(plan), run_experiment(plan)
    deterministic = all(
        [r1.best_fitness for r1 in c1.runs] == [r2.best_fitness for r2 in c2.runs]
        and all(
            np.array_equal(r1.trajectory, r2.trajectory)
            for r1, r2 in zip(c1.runs, c2.runs)
        )
        for c1, c2 in zip(first.cells, second.cells)
    )
    ok = budgets_ok and deterministic
    report(5, "protocol fidelity", ok, "5000 evaluations per run, 50-run cells repeatable")
    assert budgets_ok
    assert deterministic


def _trend_suite_plan() -> ExperimentPlan:
    """10 random 3-SAT instances (4x N=48, 3x N=100, 3x N=250, ratio 4.3)
    plus the two deceptive traps; 30 seeded runs per cell."""
    sizes = [48, 48, 48, 48, 100, 100, 100, 250, 250, 250]
    problems = [
        ProblemSpec(
            f"sat{n}-{i}", f"3sat:{n}:{round(4.3 * n)}:{101 + i}"
        )
        for i, n in enumerate(sizes)
    ]
    problems += [ProblemSpec("trap24", "trap:24"), ProblemSpec("trap125", "trap:125")]
    return ExperimentPlan(
        problems=tuple(problems),
        algorithms=(
            AlgorithmSpec("qiga2", (("mu", 0.9918),)),
            AlgorithmSpec("sga"),
        ),
        runs_per_cell=30,
        base_seed=0,
        max_fitness_evaluations=5000,
    )


def test_criterion_6_desk_scale_trend():
    plan = _trend_suite_plan()
    with Stopwatch() as clock:
        result = run_experiment(plan)
    problems = result.problems()
    higher = sum(
        result.cell(p, "qiga2").mean > result.cell(p, "sga").mean for p in problems
    )
    ranking = rank_algorithms(result)
    fraction = higher / len(problems)
    ok = fraction >= 0.70 and ranking.first == "qiga2"
    report(
        6,
        "desk-scale trend",
        ok,
        f"qiga2 higher mean on {higher}/{len(problems)} problems, "
        f"ranking {ranking.rows}, {clock.elapsed:.0f}s",
    )
    assert fraction >= 0.70, f"qiga2 beat sga on only {higher}/{len(problems)} problems"
    assert ranking.first == "qiga2"


def test_criterion_7_epistasis_trap(epistasis_runs):
    optimum = epistasis_runs["optimum"]["trap24"]
    hits2 = int(np.sum(epistasis_runs[("trap24", 2)] == optimum))
    hits1 = int(np.sum(epistasis_runs[("trap24", 1)] == optimum))
    n = len(epistasis_runs[("trap24", 2)])
    _, p = scipy_stats.fisher_exact(
        [[hits2, n - hits2], [hits1, n - hits1]], alternative="greater"
    )
    ok = hits2 > hits1 and p < 0.01
    report(
        7,
        "epistasis: order-2 beats order-1 on pair trap",
        ok,
        f"{hits2}/{n} vs {hits1}/{n} optima, one-sided p={p:.3g}",
    )
    assert hits2 > hits1
    assert p < 0.01


def test_criterion_7_separable_indistinguishable(epistasis_runs):
    optimum = epistasis_runs["optimum"]["onemax48"]
    hits2 = int(np.sum(epistasis_runs[("onemax48", 2)] == optimum))
    hits1 = int(np.sum(epistasis_runs[("onemax48", 1)] == optimum))
    n = len(epistasis_runs[("onemax48", 2)])
    _, p = scipy_stats.fisher_exact(
        [[hits2, n - hits2], [hits1, n - hits1]], alternative="two-sided"
    )
    ok = p >= 0.01
    report(
        7,
        "epistasis: orders indistinguishable on separable problem",
        ok,
        f"{hits2}/{n} vs {hits1}/{n} optima, two-sided p={p:.3g}",
    )
    assert p >= 0.01, (
        f"order-2 reached the onemax48 optimum in {hits2}/{n} runs vs order-1 "
        f"{hits1}/{n} (two-sided Fisher p={p:.3g} < 0.01): the orders are "
        "distinguishable on a separable problem at the default parameters. "
        "This is structural for uniform-factor contraction: both orders have "
        "identical per-bit marginal exploration, but an order-2 register locks "
        "half of that mass into coupled double-bit flips, halving the "
        "single-bit repair rate a separable landscape needs (the same coupling "
        "that wins the deceptive pair trap). See README, Tests section."
    )


def test_criterion_8_byte_determinism(tmp_path, capsys):
    plan_doc = """{
  "runs": 3,
  "seed": 7,
  "max_fitness_evaluations": 200,
  "problems": [
    {"name": "om10", "source": "onemax:10"},
    {"name": "trap3", "source": "trap:3"}
  ],
  "algorithms": [
    {"id": "qiga2", "quantum_population_size": 5},
    {"id": "sga", "population_size": 10}
  ]
}
"""
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(plan_doc)
    identical = True
    outputs = []
    for label in ("first", "second"):
        outdir = tmp_path / label
        assert cli_main(["bench", "--plan", str(plan_path), "--outdir", str(outdir)]) == 0
        assert (
            cli_main(
                ["gen", "--vars", "10", "--clauses", "43", "--seed", "5",
                 "--out", str(outdir / "inst.cnf")]
            )
            == 0
        )
        assert (
            cli_main(
                ["theory", "--n-range", "2:30", "--orders", "1,2,3",
                 "--csv", str(outdir / "grid.csv")]
            )
            == 0
        )
        outputs.append(outdir)
    capsys.readouterr()
    names = sorted(p.name for p in outputs[0].iterdir())
    for name in names:
        if not filecmp.cmp(outputs[0] / name, outputs[1] / name, shallow=False):
            identical = False
    report(8, "byte-for-byte determinism", identical, f"{len(names)} files compared")
    assert identical
