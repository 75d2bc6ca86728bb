import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    brute_count_cost,
    brute_knapsack_max,
    brute_linear_cost,
    brute_median_cost,
)
from pdq.errors import (
    DegenerateScalingError,
    DomainError,
    InfeasibleTargetError,
    InputError,
    NoDataError,
)
from pdq.market import COUNT, LINEAR, MEDIAN, QuerySpec
from pdq.private_query import (
    SampledDataset,
    _knapsack_max,
    candidate_outputs,
    eval_query,
    modification_score,
    modification_scores,
    output_distribution,
    sample_laplace,
    sample_output,
)

COUNT_Q = QuerySpec(COUNT, (0.0, 1.0))
MEDIAN_Q = QuerySpec(MEDIAN, (1, 100))


def count_sample(values, eps, full_n=None):
    values = np.asarray(values, dtype=float)
    return SampledDataset(values, np.asarray(eps, float), full_n or values.size)


def median_sample(values, eps):
    values = np.asarray(values, dtype=float)
    return SampledDataset(values, np.asarray(eps, float), values.size)


class TestSampledDataset:
    def test_empty_rejected(self):
        with pytest.raises(NoDataError):
            SampledDataset(np.array([]), np.array([]), 0)

    def test_shape_and_eps_validation(self):
        with pytest.raises(InputError):
            SampledDataset(np.array([1.0]), np.array([0.5, 0.5]), 2)
        with pytest.raises(InputError):
            SampledDataset(np.array([1.0]), np.array([0.0]), 1)
        with pytest.raises(InputError):
            SampledDataset(np.array([1.0]), np.array([np.nan]), 1)
        with pytest.raises(InputError):
            SampledDataset(np.array([1.0, 0.0]), np.array([0.5, 0.5]), 1)

    def test_weights_shape(self):
        with pytest.raises(InputError):
            SampledDataset(
                np.array([1.0]), np.array([0.5]), 1, weights=np.array([1.0, 2.0])
            )


class TestEvalQuery:
    def test_count(self):
        assert eval_query(COUNT_Q, [1.0, 0.0, 1.0]) == 2.0

    def test_median_lower_middle(self):
        assert eval_query(MEDIAN_Q, [1.0, 5.0, 9.0]) == 5.0
        assert eval_query(MEDIAN_Q, [1.0, 5.0, 9.0, 12.0]) == 5.0

    def test_linear(self):
        q = QuerySpec(LINEAR, (0.0, 5.0), weights=(0.5, -1.0))
        assert eval_query(q, [2.0, 3.0], weights=[0.5, -1.0]) == -2.0

    def test_count_domain_check(self):
        with pytest.raises(DomainError):
            eval_query(COUNT_Q, [0.5])

    def test_median_domain_checks(self):
        with pytest.raises(DomainError):
            eval_query(MEDIAN_Q, [1.5])
        with pytest.raises(DomainError):
            eval_query(MEDIAN_Q, [0.0])
        with pytest.raises(DomainError):
            eval_query(MEDIAN_Q, [101.0])
        with pytest.raises(DomainError):
            eval_query(MEDIAN_Q, [5.0, 5.0])
        with pytest.raises(DomainError):
            eval_query(QuerySpec(MEDIAN, (0, 10)), [5.0])

    def test_linear_domain_and_weights(self):
        q = QuerySpec(LINEAR, (0.0, 1.0), weights=(1.0,))
        with pytest.raises(DomainError):
            eval_query(q, [2.0], weights=[1.0])
        with pytest.raises(InputError):
            eval_query(q, [0.5])
        with pytest.raises(InputError):
            eval_query(q, [0.5], weights=[1.0, 2.0])


class TestCandidates:
    def test_count_scaling(self):
        s = count_sample([1.0, 0.0], [0.5, 1.0], full_n=4)
        targets, reported = candidate_outputs(COUNT_Q, s)
        np.testing.assert_allclose(targets, [0.0, 1.0, 2.0])
        np.testing.assert_allclose(reported, [0.0, 2.0, 4.0])

    def test_median_candidates(self):
        s = median_sample([1.0, 5.0, 9.0], [0.2, 0.3, 0.4])
        targets, reported = candidate_outputs(MEDIAN_Q, s)
        np.testing.assert_array_equal(targets, reported)
        for needed in (1.0, 3.0, 5.0, 7.0, 9.0):
            assert needed in targets
        assert targets.size <= 2 * 3 + 1
        assert np.all(targets == np.floor(targets))
        assert np.all((targets >= 1) & (targets <= 100))

    def test_median_candidates_tight_domain(self):
        q = QuerySpec(MEDIAN, (1, 3))
        s = SampledDataset(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), 3)
        targets, _ = candidate_outputs(q, s)
        np.testing.assert_array_equal(np.sort(targets), [1.0, 2.0, 3.0])

    def test_linear_grid_contains_truth_and_respects_reach(self):
        q = QuerySpec(LINEAR, (0.0, 1.0), weights=(1.0, -2.0))
        w = np.array([1.0, -2.0])
        v = np.array([0.5, 0.25])
        s = SampledDataset(v, np.array([0.3, 0.6]), 2, weights=w,
                           full_weight_sum=float(w.sum()))
        targets, reported = candidate_outputs(q, s, lp_grid=41)
        raw = float(w @ v)
        assert raw in targets
        assert targets.size == 41
        # reachable interval: each entry can move its term across its range
        assert targets.min() == pytest.approx(0.0 + (-2.0))
        assert targets.max() == pytest.approx(1.0 + 0.0)
        # population weight mass equals the sampled mass, so no rescaling
        np.testing.assert_allclose(reported, targets)

    def test_linear_degenerate_scaling(self):
        q = QuerySpec(LINEAR, (0.0, 1.0), weights=(1.0, -1.0))
        w = np.array([1.0, -1.0])
        s = SampledDataset(np.array([0.5, 0.5]), np.array([0.3, 0.6]), 2,
                           weights=w, full_weight_sum=0.5)
        with pytest.raises(DegenerateScalingError):
            candidate_outputs(q, s)

    def test_linear_missing_weights(self):
        q = QuerySpec(LINEAR, (0.0, 1.0), weights=(1.0,))
        s = SampledDataset(np.array([0.5]), np.array([0.3]), 1)
        with pytest.raises(InputError):
            candidate_outputs(q, s)


class TestModificationScores:
    def test_count_worked_example(self):
        s = count_sample([1.0, 0.0], [0.5, 1.0])
        scores = modification_scores(COUNT_Q, s, np.array([1.0, 0.0, 2.0]))
        np.testing.assert_allclose(scores, [0.0, -0.5, -1.0])

    def test_count_infeasible_target(self):
        s = count_sample([1.0, 0.0], [0.5, 1.0])
        scores = modification_scores(COUNT_Q, s, np.array([3.0, -1.0, 0.5]))
        assert np.all(np.isneginf(scores))
        with pytest.raises(InfeasibleTargetError):
            modification_score(COUNT_Q, s, 3.0)

    def test_median_worked_example(self):
        s = median_sample([1.0, 5.0, 9.0], [0.2, 0.3, 0.4])
        assert modification_score(MEDIAN_Q, s, 5.0) == 0.0
        assert modification_score(MEDIAN_Q, s, 9.0) == pytest.approx(-0.2)
        assert modification_score(MEDIAN_Q, s, 2.0) == pytest.approx(-0.3)

    def test_median_infeasible_when_domain_lacks_room(self):
        # with domain {1..3} and values {1,2,3}, median 3 would need two
        # entries above it but only integers up to 3 exist
        q = QuerySpec(MEDIAN, (1, 3))
        s = SampledDataset(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), 3)
        with pytest.raises(InfeasibleTargetError):
            modification_score(q, s, 3.0)

    def test_linear_worked_example(self):
        q = QuerySpec(LINEAR, (0.0, 5.0), weights=(0.5, -1.0))
        w = np.array([0.5, -1.0])
        s = SampledDataset(np.array([2.0, 3.0]), np.array([0.3, 0.7]), 2,
                           weights=w, full_weight_sum=float(w.sum()))
        assert modification_score(q, s, -2.0) == 0.0
        # moving the sum up by 2 is cheapest by changing only the second
        # entry (headroom 3, cost 0.7); the first alone cannot reach it
        assert modification_score(q, s, 0.0) == pytest.approx(-0.7)

    def test_scores_nonpositive_and_zero_at_truth(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            k = int(rng.integers(1, 6))
            values = rng.integers(0, 2, k).astype(float)
            s = count_sample(values, rng.uniform(0.1, 1.0, k))
            targets, _ = candidate_outputs(COUNT_Q, s)
            scores = modification_scores(COUNT_Q, s, targets)
            assert np.all(scores <= 0.0)
            assert scores[targets == values.sum()] == 0.0


@st.composite
def count_instance(draw):
    k = draw(st.integers(1, 6))
    values = draw(st.lists(st.integers(0, 1), min_size=k, max_size=k))
    eps = draw(
        st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)
    )
    return np.array(values, dtype=float), np.array(eps)


@st.composite
def median_instance(draw):
    k = draw(st.integers(1, 5))
    values = draw(
        st.lists(st.integers(1, 12), min_size=k, max_size=k, unique=True)
    )
    eps = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    return np.array(sorted(values), dtype=float), np.array(eps)


class TestScoresAgainstBruteForce:
    @given(count_instance())
    def test_count_oracle(self, inst):
        values, eps = inst
        s = count_sample(values, eps)
        targets = np.arange(-1, values.size + 2, dtype=float)
        scores = modification_scores(COUNT_Q, s, targets)
        for t, got in zip(targets, scores):
            want = brute_count_cost(values, eps, t)
            if math.isinf(want):
                assert np.isneginf(got)
            else:
                assert got == pytest.approx(-want, abs=1e-9)

    @given(median_instance())
    def test_median_oracle(self, inst):
        values, eps = inst
        q = QuerySpec(MEDIAN, (1, 12))
        s = median_sample(values, eps)
        targets = np.arange(0, 14, dtype=float)
        scores = modification_scores(q, s, targets)
        for t, got in zip(targets, scores):
            want = brute_median_cost(values, eps, (1, 12), t)
            if math.isinf(want):
                assert np.isneginf(got), (values, eps, t)
            else:
                assert got == pytest.approx(-want, abs=1e-9), (values, eps, t)

    @settings(max_examples=40)
    @given(
        st.integers(1, 4),
        st.randoms(use_true_random=False),
    )
    def test_linear_oracle(self, k, pyrandom):
        # offsets sit at fixed fractions of the directional reach so no
        # target lands inside the float-tolerance band around a
        # feasibility boundary, where the two implementations may
        # legitimately classify it differently
        lo, hi = 0.0, 4.0
        grid = np.linspace(lo, hi, 5)
        values = np.array([pyrandom.choice(list(grid)) for _ in range(k)])
        weights = np.array(
            [pyrandom.uniform(0.2, 2.0) * pyrandom.choice([-1, 1]) for _ in range(k)]
        )
        eps = np.array([pyrandom.uniform(0.05, 1.0) for _ in range(k)])
        q = QuerySpec(LINEAR, (lo, hi), weights=tuple(weights))
        s = SampledDataset(values, eps, k, weights=weights,
                           full_weight_sum=float(weights.sum()))
        raw = float(weights @ values)
        up_sum = float(
            sum(w * (hi - v) if w > 0 else -w * (v - lo)
                for w, v in zip(weights, values))
        )
        down_sum = float(
            sum(w * (v - lo) if w > 0 else -w * (hi - v)
                for w, v in zip(weights, values))
        )
        fracs = [0.1, 0.35, pyrandom.uniform(0.45, 0.55), 0.8, 0.95, 1.2]
        offsets = [0.0]
        offsets += [f * up_sum for f in fracs if up_sum > 0.0]
        offsets += [-f * down_sum for f in fracs if down_sum > 0.0]
        targets = raw + np.array(offsets)
        scores = modification_scores(q, s, targets)
        for t, got in zip(targets, scores):
            want = brute_linear_cost(values, weights, eps, (lo, hi), t)
            if math.isinf(want):
                assert np.isneginf(got), (values, weights, eps, t)
            else:
                assert got == pytest.approx(-want, abs=1e-9), (
                    values, weights, eps, t,
                )


class TestKnapsack:
    @given(
        st.lists(
            st.tuples(st.floats(0.01, 1.0), st.floats(0.01, 2.0)),
            min_size=0,
            max_size=10,
        ),
        st.floats(0.0, 10.0),
    )
    def test_matches_enumeration(self, items, capacity):
        gains = [g for g, _ in items]
        caps = [c for _, c in items]
        got = _knapsack_max(np.array(gains), np.array(caps), capacity)
        want = brute_knapsack_max(gains, caps, capacity)
        assert got == pytest.approx(want, abs=1e-9)

    def test_zero_cap_items_are_free(self):
        got = _knapsack_max(np.array([1.0, 2.0]), np.array([0.0, 5.0]), 0.0)
        assert got == pytest.approx(1.0)


class TestOutputDistribution:
    def test_worked_probabilities(self):
        s = count_sample([1.0, 0.0], [0.5, 1.0])
        dist = output_distribution(COUNT_Q, s)
        np.testing.assert_allclose(
            dist.probabilities, [0.3265, 0.4192, 0.2543], atol=5e-5
        )
        assert dist.probabilities.sum() == pytest.approx(1.0)

    def test_truth_has_highest_probability(self):
        s = median_sample([1.0, 5.0, 9.0], [0.2, 0.3, 0.4])
        dist = output_distribution(MEDIAN_Q, s)
        best = dist.candidates[np.argmax(dist.probabilities)]
        assert best == 5.0

    def test_infeasible_candidates_dropped(self):
        q = QuerySpec(MEDIAN, (1, 3))
        s = SampledDataset(np.array([1.0, 2.0, 3.0]), np.full(3, 0.5), 3)
        dist = output_distribution(q, s)
        assert 3.0 not in dist.candidates

    def test_sampling_follows_distribution(self):
        s = count_sample([1.0, 0.0], [0.5, 1.0])
        dist = output_distribution(COUNT_Q, s)
        rng = np.random.default_rng(0)
        draws = np.array([sample_output(dist, rng) for _ in range(4000)])
        freq = [np.mean(draws == r) for r in dist.reported]
        np.testing.assert_allclose(freq, dist.probabilities, atol=0.03)

    def test_sampling_deterministic_given_seed(self):
        s = count_sample([1.0, 0.0, 1.0], [0.5, 1.0, 0.2], full_n=6)
        dist = output_distribution(COUNT_Q, s)
        a = [sample_output(dist, np.random.default_rng(42)) for _ in range(5)]
        b = [sample_output(dist, np.random.default_rng(42)) for _ in range(5)]
        assert a == b


class TestSampleLaplace:
    def test_zero_scale(self, rng):
        assert sample_laplace(0.0, rng) == 0.0

    def test_negative_scale(self, rng):
        with pytest.raises(InputError):
            sample_laplace(-1.0, rng)

    def test_spread_matches_scale(self):
        rng = np.random.default_rng(3)
        draws = np.array([sample_laplace(2.0, rng) for _ in range(20000)])
        assert abs(np.mean(draws)) < 0.1
        assert np.std(draws) == pytest.approx(2.0 * math.sqrt(2.0), rel=0.05)
