"""Acceptance gate: one test per release criterion, each printing a
pass/fail line at its pinned tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see the criterion lines.
"""

import json

import numpy as np
import pytest

from mfgkit.config import parse_config, with_override
from mfgkit.core import Grid, TimeGrid
from mfgkit.costs import LocalCost, SchellingCost, check_monotonicity, window_kernel
from mfgkit.coupler import multistart_probe, picard_solve
from mfgkit.diagnostics import (compute_psi, continuous_dependence_probe,
                                value_bound_check)
from mfgkit.hamiltonians import ham_power
from mfgkit.hjb import HJBProblem, solve_hjb_backward
from mfgkit.kfp import KFPProblem, solve_kfp_forward
from mfgkit.runner import run_experiment
from mfgkit.sampling import DensitySampler, uniform_density
from mfgkit.scenarios import scenario
from mfgkit.verification import run_mms_study

MASS_TOL = 1e-12
POSITIVITY_TOL = -1e-12
MULTISTART_TOL = 1e-9


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


def _solve_scenario(name: str, **overrides):
    tree = scenario(name)
    for dotted, value in overrides.items():
        tree = with_override(tree, dotted.replace("__", "."), value)
    config = parse_config(tree)
    problem = config.problem()
    sol, _ = picard_solve(problem, damping=config.solver["theta"],
                          tol=config.solver["tol"],
                          max_iter=config.solver["max_iter"])
    return config, problem, sol


@pytest.fixture(scope="module")
def solved_runs():
    """Every bundled scenario that defines a solvable problem, solved once.

    The sweep scenario contributes one run per swept horizon value.
    """
    runs = {}
    for name in ("schelling_smallT", "robust_1d", "robust_1d_concave",
                 "decoupled_sanity"):
        runs[name] = _solve_scenario(name)
    for T in (0.1, 0.25, 0.5):
        runs[f"schelling_largeT_sweep[T={T}]"] = _solve_scenario(
            "schelling_largeT_sweep", time__horizon=T)
    return runs


def test_mass_conservation(solved_runs):
    worst = 0.0
    for name, (config, problem, sol) in solved_runs.items():
        masses = sol.densities.sum(axis=2) * problem.grid.cell_volume
        worst = max(worst, float(np.max(np.abs(masses - 1.0))))
    _report("mass conservation", worst <= MASS_TOL,
            f"max |mass - 1| = {worst:.3e} <= {MASS_TOL:.0e} "
            f"over {len(solved_runs)} scenario runs, all time steps")


def test_positivity(solved_runs):
    worst = min(float(np.min(sol.densities))
                for _, _, sol in solved_runs.values())
    _report("positivity", worst >= POSITIVITY_TOL,
            f"min density = {worst:.3e} >= {POSITIVITY_TOL:.0e} cellwise")


def test_mms_convergence():
    study = run_mms_study()
    t_ok = all(0.8 <= o <= 1.3 for o in study.temporal_orders)
    s_ok = all(1.7 <= o <= 2.3 for o in study.spatial_orders)
    _report("MMS convergence", t_ok and s_ok,
            f"temporal orders {[f'{o:.3f}' for o in study.temporal_orders]} "
            f"in [0.8, 1.3]; spatial orders "
            f"{[f'{o:.3f}' for o in study.spatial_orders]} in [1.7, 2.3]")


def test_kfp_oracle_equivalence():
    # constant drift, T = 1: coarse solve against a 4x-refined self-reference
    def final_profile(n):
        grid = Grid(((0.0, 1.0),), (n,))
        tg = TimeGrid(1.0, n)
        drift = np.ones((tg.steps + 1, 1, grid.n_cells, 1))
        problem = KFPProblem(grid, tg, (0.1,), drift,
                             uniform_density(grid)[None, :])
        return solve_kfp_forward(problem)[-1, 0]

    coarse = final_profile(800)
    fine = final_profile(3200).reshape(800, 4).mean(axis=1)
    rel_l1 = float(np.abs(coarse - fine).sum() / np.abs(fine).sum())
    _report("KFP oracle equivalence", rel_l1 < 0.01,
            f"relative L1 deviation from 4x-refined reference = "
            f"{rel_l1:.4%} < 1%")


def test_discrete_comparison_principle():
    grid = Grid(((0.0, 1.0),), (100,))
    tg = TimeGrid(0.5, 50)
    rng = np.random.default_rng(0)
    f_lo = rng.uniform(-1.0, 0.0, grid.n_cells)
    f_gap = rng.uniform(0.0, 1.0, grid.n_cells)
    g_lo = rng.uniform(-1.0, 0.0, grid.n_cells)
    g_gap = rng.uniform(0.0, 1.0, grid.n_cells)
    zero_ham = ham_power(0.0, 0.0, 2.0)

    def solve(f, g):
        problem = HJBProblem(grid, tg, (1.0,), [zero_ham],
                             forcing=lambda t, x: f[None, :],
                             terminal=g[None, :])
        return solve_hjb_backward(problem)

    gap = np.min(solve(f_lo + f_gap, g_lo + g_gap) - solve(f_lo, g_lo))
    _report("discrete comparison principle", gap >= -1e-12,
            f"H = 0, ordered data: min(v2 - v1) = {gap:.3e} >= -1e-12 "
            "at every cell and time point")


def test_small_horizon_uniqueness_probe():
    config = parse_config(scenario("schelling_smallT"))
    report = multistart_probe(config.problem(), n_starts=4,
                              damping=config.solver["theta"],
                              tol=MULTISTART_TOL,
                              max_iter=config.solver["max_iter"], seed=0)
    ok = (report.n_converged == 4
          and report.max_pairwise_distance <= 10 * MULTISTART_TOL)
    _report("small-T uniqueness probe", ok,
            f"{report.n_converged}/4 starts converged, max pairwise "
            f"distance {report.max_pairwise_distance:.3e} <= "
            f"{10 * MULTISTART_TOL:.0e}; verdict: {report.verdict}")


def test_certificate_consistency():
    hand = compute_psi(T=1.0, L_F=0.0, L_G=0.5, C_H=1.0, Cbar_H=1.0,
                       N=1, M=1.0)
    err = abs(hand - np.e / 2)
    zero = compute_psi(0.0, 1.0, 1.0, 1.0, 1.0, 2, 1.0)
    rng = np.random.default_rng(1)
    monotone = True
    for _ in range(1000):
        args = [rng.uniform(0.01, 3.0), rng.uniform(0.0, 2.0),
                rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0),
                rng.uniform(0.01, 2.0), int(rng.integers(1, 5)),
                rng.uniform(0.01, 3.0)]
        lo = compute_psi(*args)
        i = int(rng.integers(0, 7))
        args[i] += 1 if i == 5 else rng.uniform(0.01, 1.0)
        if compute_psi(*args) < lo - 1e-12:
            monotone = False
            break
    ok = err <= 1e-12 and zero == 0.0 and monotone
    _report("certificate consistency", ok,
            f"hand-computed value error {err:.2e} <= 1e-12, "
            f"psi(T=0) = {zero}, monotone over 1000 random samples: "
            f"{monotone}")


def test_monotonicity_checker():
    grid = Grid(((0.0, 1.0),), (60,))
    own = LocalCost(1, [lambda x, m: m[:, 0]])
    rep_mono = check_monotonicity(own, grid, DensitySampler(grid, 1, 0), 100)
    neg = LocalCost(1, [lambda x, m: -m[:, 0]])
    rep_neg = check_monotonicity(neg, grid, DensitySampler(grid, 1, 0), 100)
    schelling = SchellingCost(window_kernel(0.2), [0.4, 0.4], eta=0.01,
                              eps=0.05)
    rep_sch = check_monotonicity(schelling, grid,
                                 DensitySampler(grid, 2, 0), 500)
    ok = rep_mono.monotone and not rep_neg.monotone and not rep_sch.monotone
    _report("monotonicity checker", ok,
            f"own-density cost: {rep_mono.verdict}; negated: "
            f"{rep_neg.verdict}; threshold-discomfort cost: "
            f"{rep_sch.verdict} (min pairing {rep_sch.min_pairing:.4f} "
            "within 500 fixed-seed samples)")


def test_value_bound(solved_runs):
    details = []
    all_ok = True
    for name in ("schelling_smallT", "robust_1d", "robust_1d_concave"):
        config, problem, sol = solved_runs[name]
        alpha = max(h.alpha for h in problem.hamiltonians)
        res = value_bound_check(sol, C_F=problem.cost.C_F,
                                C_G=problem.cost.C_G, alpha=alpha,
                                T=problem.time_grid.horizon,
                                dt=problem.time_grid.dt,
                                h=max(problem.grid.spacing))
        all_ok = all_ok and res.passed
        details.append(f"{name}: max|v| = {res.observed:.4f} <= "
                       f"{res.bound:.4f}")
    _report("value bound", all_ok, "; ".join(details))


def test_continuous_dependence():
    config = parse_config(scenario("schelling_smallT"))
    table = continuous_dependence_probe(
        config.problem(), [1e-2, 1e-3, 1e-4], seed=0,
        damping=config.solver["theta"], tol=config.solver["tol"],
        max_iter=config.solver["max_iter"])
    ratios = [r.ratio for r in table.rows if r.ratio is not None]
    spread = max(ratios) / min(ratios) if ratios else np.inf
    ok = table.bounded and len(ratios) == 3
    _report("continuous dependence", ok,
            f"perturbation ratios {[f'{r:.6f}' for r in ratios]} over "
            f"eps in {{1e-2, 1e-3, 1e-4}}; max/min = {spread:.4f} <= 10")


def test_determinism(tmp_path):
    config_a = parse_config(scenario("decoupled_sanity"))
    config_b = parse_config(scenario("decoupled_sanity"))
    run_experiment(config_a, tmp_path / "a")
    run_experiment(config_b, tmp_path / "b")
    files = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    identical = bool(files) and all(
        (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        for f in files)
    hash_a = json.loads((tmp_path / "a" / "manifest.json").read_text())[
        "config_hash"]
    hash_b = json.loads((tmp_path / "b" / "manifest.json").read_text())[
        "config_hash"]
    ok = identical and hash_a == hash_b
    _report("determinism", ok,
            f"re-run reproduced {len(files)} CSV files byte-identically; "
            f"config hash {hash_a[:12]}... stable")
