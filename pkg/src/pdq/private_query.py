"""Exponential-mechanism query answering over purchased data.

The mechanism scores each candidate answer by how cheaply the sampled
dataset could be modified to make that answer exact, where the cost of
modifying an entry is its owner's privacy requirement.  Sampling a
candidate with probability proportional to exp(score / 2) then satisfies
each owner's personal privacy requirement.
"""

import heapq
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DegenerateScalingError,
    DomainError,
    InfeasibleTargetError,
    InputError,
    NoDataError,
    SolverError,
)
from .market import COUNT, MEDIAN, QuerySpec

_KNAPSACK_NODE_CAP = 5_000_000


@dataclass(frozen=True)
class SampledDataset:
    """Data bought from the selected owners, plus population context.

    ``full_n`` is the size of the population the reported answer should
    refer to.  ``weights`` and ``full_weight_sum`` are only used by
    linear queries.
    """

    values: np.ndarray
    eps: np.ndarray
    full_n: int
    weights: Optional[np.ndarray] = None
    full_weight_sum: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        eps = np.asarray(self.eps, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "eps", eps)
        if values.size == 0:
            raise NoDataError("no owners were selected; nothing to answer from")
        if values.shape != eps.shape:
            raise InputError(
                f"{values.size} values but {eps.size} privacy requirements"
            )
        if np.any(eps <= 0.0) or not np.all(np.isfinite(eps)):
            raise InputError("privacy requirements must be finite and > 0")
        if self.full_n < values.size:
            raise InputError(
                f"population size {self.full_n} smaller than sample {values.size}"
            )
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            object.__setattr__(self, "weights", w)
            if w.shape != values.shape:
                raise InputError("need one weight per sampled value")

    @property
    def k(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class OutputDistribution:
    """Candidate answers with their scores and sampling probabilities.

    ``candidates`` live in the raw sample-query space; ``reported`` are
    the same answers rescaled to the full population.
    """

    candidates: np.ndarray
    reported: np.ndarray
    scores: np.ndarray
    probabilities: np.ndarray


def eval_query(query: QuerySpec, values, weights=None):
    """Exact query value on a concrete dataset (no privacy)."""
    values = np.asarray(values, dtype=float)
    if query.kind == COUNT:
        _check_count_values(values)
        return float(values.sum())
    if query.kind == MEDIAN:
        _check_median_values(values, query.data_domain)
        v = np.sort(values)
        return float(v[(v.size - 1) // 2])
    _check_linear_values(values, query.data_domain)
    if weights is None:
        raise InputError("linear queries need weights")
    w = np.asarray(weights, dtype=float)
    if w.shape != values.shape:
        raise InputError("need one weight per value")
    return float(w @ values)


def _check_count_values(values):
    if not np.all((values == 0.0) | (values == 1.0)):
        raise DomainError("count queries need binary (0/1) data values")


def _check_median_values(values, domain):
    lo, hi = domain
    if lo < 1 or lo != int(lo) or hi != int(hi):
        raise DomainError(
            f"median queries need an integer domain with lower bound >= 1, "
            f"got [{lo}, {hi}]"
        )
    if np.any(values != np.floor(values)):
        raise DomainError("median queries need integer data values")
    if np.any(values < lo) or np.any(values > hi):
        raise DomainError(f"median data values must lie in [{lo}, {hi}]")
    if np.unique(values).size != values.size:
        raise DomainError("median data values must be distinct")


def _check_linear_values(values, domain):
    lo, hi = domain
    if np.any(values < lo) or np.any(values > hi):
        raise DomainError(f"linear data values must lie in [{lo}, {hi}]")


# -- candidate answers ------------------------------------------------------


def candidate_outputs(query: QuerySpec, sampled: SampledDataset, lp_grid: int = 201):
    """Enumerate candidate answers for the sampled data.

    Returns ``(targets, reported)``: raw answers over the sample and the
    same answers scaled up to the population.  Counts scale by n/k,
    medians report as-is, and linear answers scale by the ratio of the
    population weight mass to the sampled weight mass.
    """
    k = sampled.k
    if query.kind == COUNT:
        _check_count_values(sampled.values)
        targets = np.arange(k + 1, dtype=float)
        return targets, targets * (sampled.full_n / k)
    if query.kind == MEDIAN:
        _check_median_values(sampled.values, query.data_domain)
        targets = _median_candidates(sampled.values, query.data_domain).astype(float)
        return targets, targets.copy()
    return _linear_candidates(query, sampled, lp_grid)


def _median_candidates(values, domain):
    lo, hi = int(domain[0]), int(domain[1])
    v = np.sort(values.astype(np.int64))
    bounds = np.concatenate([[lo - 1], v, [hi + 1]])
    gaps = bounds[1:] - bounds[:-1]
    mids = (bounds[:-1] + bounds[1:]) // 2
    return np.unique(np.concatenate([v, mids[gaps >= 2]]))


def _linear_candidates(query, sampled, lp_grid):
    if sampled.weights is None or sampled.full_weight_sum is None:
        raise InputError(
            "linear queries need sampled weights and the population weight sum"
        )
    if lp_grid < 2:
        raise InputError(f"candidate grid needs at least 2 points, got {lp_grid}")
    _check_linear_values(sampled.values, query.data_domain)
    w_sum = float(np.sum(sampled.weights))
    w_scale = float(np.sum(np.abs(sampled.weights)))
    if abs(w_sum) <= 1e-12 * max(1.0, w_scale):
        raise DegenerateScalingError(
            "sampled weights sum to zero; the answer cannot be scaled up"
        )
    raw = float(sampled.weights @ sampled.values)
    up, down = _linear_caps(sampled.values, sampled.weights, query.data_domain)
    lo_reach = raw - float(down.sum())
    hi_reach = raw + float(up.sum())
    if hi_reach - lo_reach <= 0.0:
        targets = np.array([raw])
    else:
        targets = np.linspace(lo_reach, hi_reach, lp_grid)
        targets[np.argmin(np.abs(targets - raw))] = raw
    reported = targets * (sampled.full_weight_sum / w_sum)
    return targets, reported


def _linear_caps(values, weights, domain):
    """Per-entry headroom: how far w_i d_i can move up or down."""
    lo, hi = domain
    pos = weights > 0
    up = np.where(pos, weights * (hi - values), -weights * (values - lo))
    down = np.where(pos, weights * (values - lo), -weights * (hi - values))
    return up, down


# -- modification scores ----------------------------------------------------


def modification_scores(query: QuerySpec, sampled: SampledDataset, targets):
    """Score of each target: minus the cheapest total privacy requirement
    over entries that must change for the query to return that target.

    Unreachable targets score -inf.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    if query.kind == COUNT:
        _check_count_values(sampled.values)
        costs = _count_costs(sampled.values, sampled.eps, targets)
    elif query.kind == MEDIAN:
        _check_median_values(sampled.values, query.data_domain)
        costs = _median_costs(sampled.values, sampled.eps, query.data_domain, targets)
    else:
        if sampled.weights is None:
            raise InputError("linear queries need sampled weights")
        _check_linear_values(sampled.values, query.data_domain)
        costs = _linear_costs(
            sampled.values, sampled.weights, sampled.eps, query.data_domain, targets
        )
    return -costs


def modification_score(query: QuerySpec, sampled: SampledDataset, target) -> float:
    score = modification_scores(query, sampled, [target])[0]
    if not np.isfinite(score):
        raise InfeasibleTargetError(
            f"no modification of the sample can make the {query.kind} "
            f"query return {target}"
        )
    return float(score)


def _count_costs(values, eps, targets):
    k = values.size
    current = int(values.sum())
    ones = np.sort(eps[values == 1.0])
    zeros = np.sort(eps[values == 0.0])
    cum_ones = np.concatenate([[0.0], np.cumsum(ones)])
    cum_zeros = np.concatenate([[0.0], np.cumsum(zeros)])
    costs = np.full(targets.shape, np.inf)
    ok = (targets == np.floor(targets)) & (targets >= 0) & (targets <= k)
    t = targets[ok].astype(int)
    vals = np.where(
        t < current, cum_ones[np.maximum(current - t, 0)],
        cum_zeros[np.maximum(t - current, 0)],
    )
    costs[ok] = vals
    return costs


def _median_costs(values, eps, domain, targets):
    lo, hi = int(domain[0]), int(domain[1])
    k = values.size
    med = (k - 1) // 2
    order = np.argsort(values)
    v = values[order]
    e = eps[order]
    cost_up, cost_dn = _median_score_table(e, med)

    L = np.searchsorted(v, targets, side="left")
    present = (L < k) & (v[np.minimum(L, k - 1)] == targets)
    costs = np.zeros(targets.shape)
    above = L > med
    costs[above] = cost_up[L[above] - med - 1]
    below_present = present & (L < med)
    costs[below_present] = cost_dn[med - L[below_present] - 1]
    below_absent = ~present & (L <= med)
    costs[below_absent] = cost_dn[med - L[below_absent]]

    feasible = (
        (targets == np.floor(targets))
        & (targets >= lo)
        & (targets <= hi)
        & (targets - lo >= med)
        & (hi - targets >= k - med - 1)
    )
    costs[~feasible] = np.inf
    return costs


def _median_score_table(e, med):
    """Cheapest modification cost as the target moves away from the median.

    cost_up[s-1]: cost for targets in the s-th value gap above the median,
    which needs the s cheapest entries among the first med+s (all sitting
    below the target) pushed up.  cost_dn mirrors it downward, where one
    extra mover is needed to occupy the target itself.
    """
    e = [float(x) for x in e]
    k = len(e)
    cost_up = np.empty(k - med)
    pool = e[:med]
    heapq.heapify(pool)
    total = 0.0
    for s in range(1, k - med + 1):
        heapq.heappush(pool, e[med + s - 1])
        total += heapq.heappop(pool)
        cost_up[s - 1] = total
    cost_dn = np.empty(med + 1)
    pool = e[med + 1:]
    heapq.heapify(pool)
    total = 0.0
    for s in range(1, med + 2):
        heapq.heappush(pool, e[med - s + 1])
        total += heapq.heappop(pool)
        cost_dn[s - 1] = total
    return cost_up, cost_dn


def _linear_costs(values, weights, eps, domain, targets):
    raw = float(weights @ values)
    up, down = _linear_caps(values, weights, domain)
    total_eps = float(eps.sum())
    costs = np.empty(targets.shape)
    for i, t in enumerate(targets):
        costs[i] = _linear_cost(eps, up, down, t - raw, total_eps)
    return costs


def _linear_cost(eps, up, down, delta, total_eps):
    scale = max(1.0, abs(delta))
    if abs(delta) <= 1e-12 * scale:
        return 0.0
    caps = up if delta > 0 else down
    room = float(caps.sum()) - abs(delta)
    if room < -1e-9 * max(1.0, float(caps.sum())):
        return np.inf
    kept = _knapsack_max(eps, caps, max(room, 0.0))
    return total_eps - kept


def _knapsack_max(gains, caps, capacity, node_cap=_KNAPSACK_NODE_CAP):
    """Exact 0/1 knapsack: max total gain with total cap <= capacity.

    Finding the cheapest set of entries whose combined headroom covers a
    shift is the complement problem: keep unmodified the most privacy
    requirement possible subject to the headroom that must remain spent.
    Branch and bound in density order with a fractional relaxation bound.
    """
    gains = np.asarray(gains, dtype=float)
    caps = np.asarray(caps, dtype=float)
    cap_scale = max(1.0, float(caps.max(initial=0.0)))
    slack = 1e-12 * cap_scale
    free = caps <= slack
    base = float(gains[free].sum())
    gains = gains[~free]
    caps = caps[~free]
    n = gains.size
    if n == 0 or capacity <= slack:
        return base
    order = np.argsort(-(gains / caps), kind="stable")
    gains = gains[order]
    caps = caps[order]
    cap_prefix = np.concatenate([[0.0], np.cumsum(caps)])
    gain_prefix = np.concatenate([[0.0], np.cumsum(gains)])
    gain_tol = 1e-12 * max(1.0, float(gain_prefix[-1]))

    def relax(idx, room):
        # fractional bound plus greedy integral completion from item idx on
        target = cap_prefix[idx] + room
        j = int(np.searchsorted(cap_prefix, target + slack, side="right")) - 1
        whole = gain_prefix[j] - gain_prefix[idx]
        bound = whole
        if j < n:
            spare = target - cap_prefix[j]
            if spare > 0.0:
                bound += gains[j] * (spare / caps[j])
        return bound, whole

    best = 0.0
    nodes = 0
    stack = [(0, float(capacity), 0.0)]
    while stack:
        idx, room, value = stack.pop()
        nodes += 1
        if nodes > node_cap:
            raise SolverError(
                "modification-cost search exceeded its node budget; "
                "the instance is too large for an exact answer"
            )
        bound, whole = relax(idx, room)
        if value + whole > best:
            best = value + whole
        if value + bound <= best + gain_tol or idx == n:
            continue
        stack.append((idx + 1, room, value))
        if caps[idx] <= room + slack:
            stack.append((idx + 1, room - caps[idx], value + gains[idx]))
    return base + best


# -- the mechanism itself ---------------------------------------------------


def output_distribution(
    query: QuerySpec, sampled: SampledDataset, lp_grid: int = 201
) -> OutputDistribution:
    """Distribution over candidate answers, proportional to exp(score/2)."""
    targets, reported = candidate_outputs(query, sampled, lp_grid)
    scores = modification_scores(query, sampled, targets)
    keep = np.isfinite(scores)
    if not np.any(keep):
        raise InfeasibleTargetError("every candidate answer is unreachable")
    targets, reported, scores = targets[keep], reported[keep], scores[keep]
    logits = scores / 2.0
    probs = np.exp(logits - logits.max())
    probs /= probs.sum()
    return OutputDistribution(targets, reported, scores, probs)


def sample_output(dist: OutputDistribution, rng) -> float:
    """Draw one reported answer from the distribution."""
    cdf = np.cumsum(dist.probabilities)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    return float(dist.reported[min(idx, dist.reported.size - 1)])


def sample_laplace(scale: float, rng) -> float:
    if scale < 0.0:
        raise InputError(f"noise scale must be >= 0, got {scale}")
    if scale == 0.0:
        return 0.0
    return float(rng.laplace(0.0, scale))
