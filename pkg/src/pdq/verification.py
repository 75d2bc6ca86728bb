"""Exact and statistical checks for the privacy and auction guarantees.

Everything here recomputes properties from first principles (exhaustive
neighbour enumeration, closed-form utilities, Monte-Carlo budgets) so
the mechanism code is validated by an independent route.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError
from .market import MEDIAN, QuerySpec, RegularPrior, prior_quantile
from .private_query import (
    OutputDistribution,
    SampledDataset,
    candidate_outputs,
    modification_scores,
    output_distribution,
)
from .thresholds import ThresholdVector, solve_threshold_system

_MAX_EXACT_SIZE = 8


@dataclass(frozen=True)
class PdpReport:
    """Achieved privacy (max log output ratio) per sampled entry."""

    per_index_max_log_ratio: np.ndarray
    required: np.ndarray
    passed: bool


@dataclass(frozen=True)
class IcIrReport:
    worst_ic_violation: float
    worst_ir_violation: float
    thresholds: ThresholdVector
    passed: bool


@dataclass(frozen=True)
class BudgetReport:
    mc_mean: float
    expected: float
    stderr: float
    exceedance_rate: float
    passed: bool


@dataclass(frozen=True)
class PacBoundReport:
    radius: float
    alpha: int
    applicable: bool
    bound: Optional[float]
    purchased_privacy: float
    passed: bool


def _half_softmax(scores: np.ndarray) -> np.ndarray:
    finite = scores[np.isfinite(scores)]
    if finite.size == 0:
        raise InputError("no feasible candidate on one side of a neighbour pair")
    logits = scores / 2.0
    p = np.exp(logits - finite.max() / 2.0)
    return p / p.sum()


def verify_pdp(
    query: QuerySpec, sampled: SampledDataset, neighbor_domain, slack: float = 1e-9
) -> PdpReport:
    """Exhaustively check the per-entry privacy guarantee.

    For every entry i and every replacement value from neighbor_domain,
    build the neighbouring dataset, compute both exact output
    distributions over the union of their candidate answers, and record
    the worst absolute log probability ratio.  Entry i passes when that
    ratio is at most its privacy requirement.  A candidate reachable on
    one side only gets probability zero there, making the ratio infinite
    and failing the check.
    """
    k = sampled.k
    if k > _MAX_EXACT_SIZE:
        raise InputError(
            f"exact verification is limited to {_MAX_EXACT_SIZE} entries, got {k}"
        )
    alternatives = np.unique(np.asarray(neighbor_domain, dtype=float))
    base_targets, _ = candidate_outputs(query, sampled)
    max_ratio = np.zeros(k)
    for i in range(k):
        for x in alternatives:
            if x == sampled.values[i]:
                continue
            if query.kind == MEDIAN and np.any(sampled.values == x):
                continue
            neighbor_values = sampled.values.copy()
            neighbor_values[i] = x
            neighbor = SampledDataset(
                values=neighbor_values,
                eps=sampled.eps,
                full_n=sampled.full_n,
                weights=sampled.weights,
                full_weight_sum=sampled.full_weight_sum,
            )
            nb_targets, _ = candidate_outputs(query, neighbor)
            union = np.unique(np.concatenate([base_targets, nb_targets]))
            p_base = _half_softmax(modification_scores(query, sampled, union))
            p_nb = _half_softmax(modification_scores(query, neighbor, union))
            with np.errstate(divide="ignore", invalid="ignore"):
                log_ratio = np.abs(np.log(p_base) - np.log(p_nb))
            one_sided = (p_base == 0.0) != (p_nb == 0.0)
            ratio = np.inf if one_sided.any() else float(
                log_ratio[(p_base > 0.0) & (p_nb > 0.0)].max()
            )
            if ratio > max_ratio[i]:
                max_ratio[i] = ratio
    passed = bool(np.all(max_ratio <= sampled.eps + slack))
    return PdpReport(max_ratio, sampled.eps.copy(), passed)


def pac_radius(dist: OutputDistribution, truth: float, delta: float) -> float:
    """Smallest radius around the truth holding at least delta mass."""
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    distance = np.abs(dist.reported - truth)
    order = np.argsort(distance, kind="stable")
    cum = np.cumsum(dist.probabilities[order])
    idx = int(np.searchsorted(cum, delta - 1e-12, side="left"))
    return float(distance[order][min(idx, distance.size - 1)])


def pac_privacy_lower_bound(n: int, alpha: int, delta: float) -> float:
    """Privacy mass any mechanism must buy to be (alpha, delta)-accurate.

    An answer within alpha of the truth with probability delta requires
    total purchased privacy of at least (n / 4 alpha) log(delta/(1-delta)).
    """
    if not 1 <= alpha <= n / 4:
        raise InputError(f"alpha must satisfy 1 <= alpha <= n/4, got {alpha}")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must be in (0, 1), got {delta}")
    return (n / (4.0 * alpha)) * (math.log(delta) - math.log(1.0 - delta))


def check_pac_privacy_bound(
    query: QuerySpec, sampled: SampledDataset, truth: float, delta: float
) -> PacBoundReport:
    """Confirm the purchased privacy satisfies the accuracy lower bound.

    The exact accuracy radius is rounded up to the next integer, which
    only weakens the claimed accuracy and keeps the bound valid even
    when the radius is itself integral.  Radii beyond n/4 make the bound
    inapplicable (vacuously passing).
    """
    dist = output_distribution(query, sampled)
    radius = pac_radius(dist, truth, delta)
    alpha = int(math.floor(radius)) + 1
    purchased = float(sampled.eps.sum())
    if alpha > sampled.full_n / 4:
        return PacBoundReport(radius, alpha, False, None, purchased, True)
    bound = pac_privacy_lower_bound(sampled.full_n, alpha, delta)
    passed = purchased >= bound - 1e-9
    return PacBoundReport(radius, alpha, True, bound, purchased, passed)


def check_ic_ir(
    prior: RegularPrior, eps, budget: float, grid_step: float = 0.01
) -> IcIrReport:
    """Grid-check that truthful bidding is optimal and never harmful.

    For every owner and every (true valuation, bid) pair on the grid,
    truthful utility must dominate the misreport and be nonnegative.
    """
    if grid_step <= 0.0:
        raise InputError(f"grid step must be > 0, got {grid_step}")
    tv = solve_threshold_system(prior, eps, budget)
    grid = np.arange(prior.lower, prior.upper + grid_step / 2.0, grid_step)
    worst_ic = 0.0
    worst_ir = 0.0
    for t in tv.thresholds:
        u_truth = np.where(grid <= t, t - grid, 0.0)
        bid_selected = grid <= t
        u_misreport = np.where(bid_selected[None, :], (t - grid)[:, None], 0.0)
        worst_ic = max(worst_ic, float((u_misreport - u_truth[:, None]).max()))
        worst_ir = max(worst_ir, float((-u_truth).max()))
    passed = worst_ic <= 1e-12 and worst_ir <= 1e-12
    return IcIrReport(worst_ic, worst_ir, tv, passed)


def check_interim_budget(
    prior: RegularPrior, thresholds: ThresholdVector, draws: int, rng
) -> BudgetReport:
    """Monte-Carlo check that the mean realized spend hits the target.

    Valuations are drawn i.i.d. from the prior; each owner at or below
    her threshold is paid the threshold.  The mean total payment should
    match the analytic expected spend within 3 standard errors.  The
    fraction of draws overshooting the target is reported, not asserted:
    individual draws may legitimately exceed it.
    """
    if draws < 2:
        raise InputError("need at least 2 draws for a standard error")
    t = thresholds.thresholds
    theta = prior_quantile(prior, rng.random((draws, t.size)))
    paid = np.where(theta <= t[None, :], t[None, :], 0.0).sum(axis=1)
    mean = float(paid.mean())
    stderr = float(paid.std(ddof=1) / math.sqrt(draws))
    expected = thresholds.expected_spend
    exceedance = float(np.mean(paid > expected + 1e-12))
    if stderr == 0.0:
        passed = abs(mean - expected) <= 1e-9
    else:
        passed = abs(mean - expected) <= 3.0 * stderr
    return BudgetReport(mean, expected, stderr, exceedance, passed)
