"""Randomized verification batteries behind the `pdq verify` command.

Each battery draws frozen-seed instances, checks an exact property
through an independent route (grid dynamic program, brute-force
distribution comparison, misreport grids, quantile bounds), and returns
(name, passed, detail) tuples so callers can render or assert them.
"""

import numpy as np

from .market import COUNT, MEDIAN, QuerySpec, uniform_prior
from .private_query import SampledDataset
from .thresholds import expected_purchased_privacy, solve_threshold_system
from .verification import check_ic_ir, check_pac_privacy_bound, verify_pdp

SUITE_SEED = 20240613


def grid_objective_oracle(eps, budget, theta_step=1e-3, budget_bins=50_000):
    """Best purchased privacy reachable on a discrete threshold grid.

    Independent check for the water-filling solver under the uniform(0,1)
    prior: thresholds are restricted to multiples of theta_step, spends
    are rounded up onto a budget grid, and a knapsack-style dynamic
    program maximizes sum eps_i * F(theta_i).  Rounding spend up keeps
    every grid solution feasible for the continuous problem, so the
    result is a certified lower bound on the true optimum.
    """
    eps = np.asarray(eps, dtype=float)
    thetas = np.arange(0.0, 1.0 + theta_step / 2.0, theta_step)
    spends = thetas * thetas
    delta = budget / budget_bins
    costs = np.ceil(spends / delta - 1e-12).astype(np.int64)
    usable = costs <= budget_bins
    costs = costs[usable]
    thetas = thetas[usable]

    best = np.full(budget_bins + 1, -np.inf)
    best[0] = 0.0
    for e in eps:
        gains = e * thetas
        new = best.copy()
        for c, g in zip(costs, gains):
            if c == 0:
                new = np.maximum(new, best + g)
            else:
                new[c:] = np.maximum(new[c:], best[:-c] + g)
        best = new
    return float(best.max())


def _stationarity_residual(prior, eps, tv):
    """Worst first-order optimality violation at interior thresholds."""
    t = tv.thresholds
    interior = (t > prior.lower + 1e-9) & (t < prior.upper - 1e-9)
    if not interior.any():
        return 0.0
    ti = t[interior]
    resid = eps[interior] * prior.pdf(ti) - tv.multiplier * (
        prior.cdf(ti) + ti * prior.pdf(ti)
    )
    return float(np.abs(resid).max())


def solver_battery(instances=100, seed=SUITE_SEED):
    """Threshold solver vs the grid oracle, budget binding, stationarity."""
    rng = np.random.default_rng(seed)
    prior = uniform_prior(0.0, 1.0)
    worst_gap = 0.0
    worst_binding = 0.0
    worst_resid = 0.0
    negative_gap = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 6))
        eps = np.maximum(rng.random(n), 1e-6)
        budget = max(float(rng.random() * n), 1e-9)
        tv = solve_threshold_system(prior, eps, budget)
        obj = expected_purchased_privacy(prior, tv.thresholds, eps)
        oracle = grid_objective_oracle(eps, budget)
        worst_gap = max(worst_gap, obj - oracle)
        negative_gap = min(negative_gap, obj - oracle)
        if budget < n:
            worst_binding = max(
                worst_binding,
                abs(tv.expected_spend - budget) / max(1.0, budget),
            )
        worst_resid = max(worst_resid, _stationarity_residual(prior, eps, tv))
    return [
        (
            "solver objective matches grid oracle",
            worst_gap <= 1e-2 and negative_gap >= -1e-9,
            f"max gap {worst_gap:.3e} over {instances} instances",
        ),
        (
            "budget binds below saturation",
            worst_binding <= 1e-9,
            f"max relative spend error {worst_binding:.3e}",
        ),
        (
            "stationarity at interior thresholds",
            worst_resid <= 1e-6,
            f"max first-order residual {worst_resid:.3e}",
        ),
    ]


def pdp_battery(count_instances=200, median_instances=100, seed=SUITE_SEED):
    """Exact personalized-privacy ratio checks on random small datasets."""
    rng = np.random.default_rng(seed)
    failures = 0
    worst_excess = -np.inf
    for _ in range(count_instances):
        k = int(rng.integers(1, 6))
        values = rng.integers(0, 2, size=k).astype(float)
        eps = np.maximum(rng.random(k), 1e-3)
        sampled = SampledDataset(values, eps, full_n=k)
        query = QuerySpec(COUNT, (0.0, 1.0))
        report = verify_pdp(query, sampled, neighbor_domain=(0, 1))
        excess = float(np.max(report.per_index_max_log_ratio - eps))
        worst_excess = max(worst_excess, excess)
        failures += 0 if report.passed else 1
    for _ in range(median_instances):
        k = int(rng.integers(1, 6))
        values = np.sort(rng.choice(15, size=k, replace=False) + 1).astype(
            float
        )
        eps = np.maximum(rng.random(k), 1e-3)
        sampled = SampledDataset(values, eps, full_n=k)
        query = QuerySpec(MEDIAN, (1, 15))
        report = verify_pdp(query, sampled, neighbor_domain=range(1, 16))
        excess = float(np.max(report.per_index_max_log_ratio - eps))
        worst_excess = max(worst_excess, excess)
        failures += 0 if report.passed else 1
    total = count_instances + median_instances
    return [
        (
            "personalized privacy ratios within owner levels",
            failures == 0,
            f"{total - failures}/{total} datasets, "
            f"worst log-ratio excess {worst_excess:.3e}",
        )
    ]


def icir_battery(markets=50, seed=SUITE_SEED):
    """Truthfulness and voluntary participation on misreport grids."""
    rng = np.random.default_rng(seed)
    prior = uniform_prior(0.0, 1.0)
    worst_ic = 0.0
    worst_ir = 0.0
    for _ in range(markets):
        n = int(rng.integers(1, 9))
        eps = np.maximum(rng.random(n), 1e-6)
        budget = max(float(rng.random() * n), 1e-9)
        report = check_ic_ir(prior, eps, budget, grid_step=0.01)
        worst_ic = max(worst_ic, report.worst_ic_violation)
        worst_ir = max(worst_ir, report.worst_ir_violation)
    passed = worst_ic <= 1e-12 and worst_ir <= 1e-12
    return [
        (
            "truthful bidding and voluntary participation",
            passed,
            f"worst IC violation {worst_ic:.3e}, "
            f"worst IR violation {worst_ir:.3e} over {markets} markets",
        )
    ]


def lemma2_battery(instances=100, deltas=(0.6, 0.75, 0.9), seed=SUITE_SEED):
    """Accuracy-implies-privacy-spend bound on exact count mechanisms."""
    rng = np.random.default_rng(seed)
    checked = 0
    applicable = 0
    failures = 0
    for _ in range(instances):
        k = int(rng.integers(1, 9))
        full_n = k * int(rng.integers(1, 5))
        full_values = rng.integers(0, 2, size=full_n).astype(float)
        idx = rng.choice(full_n, size=k, replace=False)
        # mix modest and generous privacy levels so some instances land
        # in the non-vacuous regime of the bound
        if rng.random() < 0.5:
            eps = np.maximum(rng.random(k), 1e-3)
        else:
            eps = 1.0 + 9.0 * rng.random(k)
        sampled = SampledDataset(full_values[idx], eps, full_n=full_n)
        query = QuerySpec(COUNT, (0.0, 1.0))
        truth = float(full_values.sum())
        for delta in deltas:
            report = check_pac_privacy_bound(query, sampled, truth, delta)
            checked += 1
            applicable += 1 if report.applicable else 0
            failures += 0 if report.passed else 1
    return [
        (
            "purchased privacy covers the accuracy lower bound",
            failures == 0,
            f"{checked - failures}/{checked} checks "
            f"({applicable} in the non-vacuous regime)",
        )
    ]


SUITES = {
    "solver": solver_battery,
    "pdp": pdp_battery,
    "icir": icir_battery,
    "lemma2": lemma2_battery,
}


def run_suite(name):
    try:
        battery = SUITES[name]
    except KeyError:
        raise KeyError(
            f"unknown suite {name!r}; expected one of {sorted(SUITES)}"
        ) from None
    return battery()


__all__ = [
    "SUITES",
    "grid_objective_oracle",
    "icir_battery",
    "lemma2_battery",
    "pdp_battery",
    "run_suite",
    "solver_battery",
]
