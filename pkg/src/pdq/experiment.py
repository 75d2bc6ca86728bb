"""Reproducible head-to-head runs of the purchase-then-answer pipeline.

A run draws one data column, sweeps budget fractions, and for every
trial draws a fresh (valuation, privacy requirement) population shared
by all mechanisms so the comparison is paired.  Results stream into two
CSV files whose bytes are fully determined by the configuration.
"""

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .baselines import (
    fip_answer,
    fip_epsilon_assignment,
    fip_select_from_arrays,
    fq_count_answer,
    fq_median_answer,
    fq_select_from_arrays,
)
from .datagen import (
    DistinctMapping,
    PopulationSpec,
    TableSchema,
    gen_correlated_uniforms,
    gen_count_values,
    gen_linear_values,
    gen_median_values,
    gen_profiles,
    load_tabular,
)
from .errors import ConfigError, DegenerateScalingError
from .market import (
    COUNT,
    LINEAR,
    MEDIAN,
    QUERY_KINDS,
    QuerySpec,
    cosine_weights,
    uniform_prior,
)
from .private_query import (
    SampledDataset,
    eval_query,
    output_distribution,
    sample_laplace,
    sample_output,
)
from .procurement import allocate_and_pay
from .thresholds import solve_threshold_system

MECH_SMQ = "smq"
MECH_FQ = "fq"
MECH_FIP = "fip"

_MECH_TAGS = {MECH_SMQ: 0, MECH_FQ: 1, MECH_FIP: 2}
_POP_TAG = 97
_DATA_TAG = 98

SUMMARY_COLUMNS = (
    "mechanism",
    "query",
    "rho",
    "budget_fraction",
    "mean",
    "ci_low",
    "ci_high",
    "rmse",
    "mean_selected",
    "mean_paid",
)

TRIAL_COLUMNS = (
    "mechanism",
    "query",
    "rho",
    "budget_fraction",
    "trial",
    "answer",
    "truth",
    "purchased_privacy",
    "num_selected",
    "total_paid",
    "fallback",
    "seed",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a sweep byte for byte."""

    query: str
    mechanisms: tuple = (MECH_SMQ,)
    rho: float = 0.0
    trials: int = 100
    budget_fractions: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    seed: int = 0
    n: int = 100
    data_file: Optional[str] = None
    schema: Optional[TableSchema] = None
    fix_population: bool = False
    count_rate: float = 0.5
    median_value_max: int = 10_000
    median_domain: Optional[tuple] = None
    value_domain: tuple = (0.0, 1.0)
    profile_dim: int = 5
    lp_grid: int = 201
    output_dir: str = "results"

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(
            self, "budget_fractions", tuple(float(f) for f in self.budget_fractions)
        )
        object.__setattr__(self, "value_domain", tuple(self.value_domain))
        if self.median_domain is not None:
            object.__setattr__(self, "median_domain", tuple(self.median_domain))
        if self.query not in QUERY_KINDS:
            raise ConfigError(
                f"unknown query kind {self.query!r}; expected one of "
                f"{sorted(QUERY_KINDS)}"
            )
        if not self.mechanisms:
            raise ConfigError("at least one mechanism is required")
        for mech in self.mechanisms:
            if mech not in _MECH_TAGS:
                raise ConfigError(
                    f"unknown mechanism {mech!r}; expected one of "
                    f"{sorted(_MECH_TAGS)}"
                )
            if mech == MECH_FIP and self.query != LINEAR:
                raise ConfigError(
                    "the fixed-information-purchase baseline only answers "
                    "linear queries"
                )
            if mech == MECH_FQ and self.query == LINEAR:
                raise ConfigError(
                    "the fixed-quota baseline only answers count and "
                    "median queries"
                )
        if not -1.0 <= self.rho <= 0.0:
            raise ConfigError(f"rho must lie in [-1, 0], got {self.rho}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.budget_fractions:
            raise ConfigError("at least one budget fraction is required")
        for frac in self.budget_fractions:
            if not 0.0 < frac <= 1.0:
                raise ConfigError(
                    f"budget fractions must lie in (0, 1], got {frac}"
                )
        if self.data_file is None:
            if self.n < 2:
                raise ConfigError(f"population size must be >= 2, got {self.n}")
        elif self.schema is None:
            raise ConfigError("a data_file needs a schema")
        if not 0.0 <= self.count_rate <= 1.0:
            raise ConfigError(f"count_rate must lie in [0, 1], got {self.count_rate}")
        if self.median_value_max < 2:
            raise ConfigError(
                f"median_value_max must be >= 2, got {self.median_value_max}"
            )
        if self.median_domain is not None:
            lo, hi = self.median_domain
            if not (float(lo).is_integer() and float(hi).is_integer()):
                raise ConfigError("median_domain bounds must be integers")
            if not 1 <= lo < hi:
                raise ConfigError(
                    f"median_domain must satisfy 1 <= lo < hi, got {self.median_domain}"
                )
        lo, hi = self.value_domain
        if not lo < hi:
            raise ConfigError(f"value_domain is empty: [{lo}, {hi}]")
        if self.profile_dim < 1:
            raise ConfigError(f"profile_dim must be >= 1, got {self.profile_dim}")
        if self.lp_grid < 3:
            raise ConfigError(f"lp_grid must be >= 3, got {self.lp_grid}")


@dataclass(frozen=True)
class TrialRecord:
    mechanism: str
    query: str
    rho: float
    budget_fraction: float
    trial: int
    answer: float
    truth: float
    purchased_privacy: float
    num_selected: int
    total_paid: float
    fallback: int
    seed: int


@dataclass(frozen=True)
class SummaryRow:
    mechanism: str
    query: str
    rho: float
    budget_fraction: float
    mean: float
    ci_low: float
    ci_high: float
    rmse: float
    mean_selected: float
    mean_paid: float


@dataclass(frozen=True)
class _PreparedData:
    n: int
    values: np.ndarray
    weights: Optional[np.ndarray]
    domain: tuple
    mapping: Optional[DistinctMapping]
    query_spec: QuerySpec
    truth: float


def _restore_float(x: float, mapping: Optional[DistinctMapping]) -> float:
    return mapping.restore(x) if mapping is not None else x


def _restore_exact(x: float, mapping: Optional[DistinctMapping]) -> float:
    if mapping is None:
        return x
    return float(mapping.restore_exact(int(round(x))))


def _prepare_data(config: ExperimentConfig) -> _PreparedData:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _DATA_TAG]))
    mapping = None
    weights = None
    if config.data_file is not None:
        table = load_tabular(config.data_file, config.schema)
        values = table.values
        mapping = table.distinct_mapping
        if config.query == LINEAR:
            if table.profiles is None:
                raise ConfigError(
                    "linear queries over a data_file need profile_columns"
                )
            # by convention the last row is the analyst's reference
            # individual; everyone else is a data owner
            if values.size < 3:
                raise ConfigError("need at least two owners plus a reference row")
            weights = cosine_weights(table.profiles[:-1], table.profiles[-1])
            values = values[:-1]
        n = int(values.size)
        if n < 2:
            raise ConfigError("need at least two data owners")
    else:
        n = config.n
        if config.query == COUNT:
            values = gen_count_values(n, config.count_rate, rng)
        elif config.query == MEDIAN:
            values = gen_median_values(n, config.median_value_max, rng)
        else:
            values = gen_linear_values(n, config.value_domain, rng)
            profiles, reference = gen_profiles(n, config.profile_dim, rng)
            weights = cosine_weights(profiles, reference)

    if config.query == COUNT:
        domain = (0.0, 1.0)
    elif config.query == MEDIAN:
        if config.data_file is not None:
            if config.median_domain is None:
                raise ConfigError(
                    "median queries over a data_file need an explicit "
                    "median_domain"
                )
            lo, hi = (int(b) for b in config.median_domain)
        else:
            lo, hi = 1, config.median_value_max
        if mapping is not None:
            lo, hi = lo * mapping.scale, hi * mapping.scale + mapping.scale - 1
        domain = (lo, hi)
    else:
        domain = config.value_domain

    if config.query == LINEAR:
        query_spec = QuerySpec(LINEAR, domain, weights=tuple(weights))
        truth = float(eval_query(query_spec, values, weights=weights))
    else:
        query_spec = QuerySpec(config.query, domain)
        truth = float(eval_query(query_spec, values))
        if config.query == MEDIAN:
            truth = _restore_exact(truth, mapping)
    return _PreparedData(n, values, weights, domain, mapping, query_spec, truth)


def _population(config: ExperimentConfig, n: int, budget_idx: int, trial: int):
    if config.fix_population:
        key = [config.seed, _POP_TAG]
    else:
        key = [config.seed, _POP_TAG, budget_idx, trial]
    rng = np.random.default_rng(np.random.SeedSequence(key))
    spec = PopulationSpec(n, config.rho)
    return gen_correlated_uniforms(spec, rng=rng)


def _smq_fallback(config: ExperimentConfig, data: _PreparedData) -> float:
    """Data-independent imputation when nothing could be bought."""
    lo, hi = data.domain
    if config.query == COUNT:
        return data.n / 2.0
    if config.query == MEDIAN:
        return _restore_float(0.5 * (lo + hi), data.mapping)
    return float(0.5 * (lo + hi) * data.weights.sum())


def _smq_trial(config, data, prior, theta, eps, budget, rng):
    tv = solve_threshold_system(prior, eps, budget)
    outcome = allocate_and_pay(theta, tv, eps)
    sel = outcome.selected_indices
    k = int(sel.size)
    paid = float(outcome.total_paid)
    purchased = float(outcome.purchased_privacy)
    if k == 0:
        return _smq_fallback(config, data), purchased, k, paid, 1
    if config.query == LINEAR:
        sampled = SampledDataset(
            data.values[sel],
            eps[sel],
            full_n=data.n,
            weights=data.weights[sel],
            full_weight_sum=float(data.weights.sum()),
        )
        try:
            dist = output_distribution(data.query_spec, sampled, config.lp_grid)
        except DegenerateScalingError:
            return _smq_fallback(config, data), purchased, k, paid, 1
    else:
        sampled = SampledDataset(data.values[sel], eps[sel], full_n=data.n)
        dist = output_distribution(data.query_spec, sampled)
    answer = sample_output(dist, rng)
    if config.query == MEDIAN:
        answer = _restore_exact(answer, data.mapping)
    return float(answer), purchased, k, paid, 0


def _fq_trial(config, data, theta, eps, budget, rng):
    sel = fq_select_from_arrays(theta, eps, budget)
    k = sel.k
    paid = float(sel.per_owner_payment.sum())
    purchased = float(k * (sel.uniform_dp_level or 0.0))
    lo, hi = data.domain
    if config.query == COUNT:
        answer = fq_count_answer(data.values[sel.selected_indices], data.n, k, rng)
        fallback = 1 if k == 0 else 0
    else:
        if k == 0:
            answer = 0.5 * (lo + hi) + sample_laplace((hi - lo) * data.n, rng)
            fallback = 1
        else:
            answer = fq_median_answer(
                data.values[sel.selected_indices], data.n, k, data.domain, rng
            )
            fallback = 0
        answer = _restore_float(answer, data.mapping)
    return float(answer), purchased, k, paid, fallback


def _fip_trial(data, sel, eps_used, rng):
    k = sel.k
    paid = float(sel.per_owner_payment.sum())
    mask = np.zeros(data.n, dtype=bool)
    mask[sel.selected_indices] = True
    purchased = float(eps_used[mask].sum())
    answer = fip_answer(
        data.values[mask],
        data.weights[mask],
        data.weights[~mask],
        data.domain,
        rng,
    )
    return float(answer), purchased, k, paid, 1 if k == 0 else 0


def run_experiment(config: ExperimentConfig):
    """Execute the sweep; returns (summary rows, trial records)."""
    data = _prepare_data(config)
    prior = uniform_prior(0.0, 1.0)
    records = []
    for b_idx, frac in enumerate(config.budget_fractions):
        budget = frac * prior.upper * data.n
        for trial in range(config.trials):
            theta, eps_drawn = _population(config, data.n, b_idx, trial)
            if config.query == LINEAR:
                # the comparison protocol lets the weight-proportional
                # baseline pick its quota from the drawn requirements,
                # then every mechanism answers under the requirements
                # implied by that quota's noise calibration
                fip_sel = fip_select_from_arrays(
                    theta, eps_drawn, data.weights, budget
                )
                eps_used = fip_epsilon_assignment(
                    data.weights, fip_sel.selected_indices
                )
            else:
                fip_sel = None
                eps_used = eps_drawn
            for mech in config.mechanisms:
                seq = np.random.SeedSequence(
                    [config.seed, _MECH_TAGS[mech], b_idx, trial]
                )
                seed_val = int(seq.generate_state(1)[0])
                rng = np.random.default_rng(seq)
                if mech == MECH_SMQ:
                    result = _smq_trial(
                        config, data, prior, theta, eps_used, budget, rng
                    )
                elif mech == MECH_FQ:
                    result = _fq_trial(config, data, theta, eps_used, budget, rng)
                else:
                    result = _fip_trial(data, fip_sel, eps_used, rng)
                answer, purchased, k, paid, fallback = result
                records.append(
                    TrialRecord(
                        mechanism=mech,
                        query=config.query,
                        rho=config.rho,
                        budget_fraction=frac,
                        trial=trial,
                        answer=answer,
                        truth=data.truth,
                        purchased_privacy=purchased,
                        num_selected=k,
                        total_paid=paid,
                        fallback=fallback,
                        seed=seed_val,
                    )
                )
    return summarize(records), records


def summarize(records) -> list:
    """Per (mechanism, budget) means, percentile intervals, and RMSE."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.mechanism, rec.budget_fraction), []).append(rec)
    rows = []
    for key in sorted(groups):
        recs = groups[key]
        answers = np.array([r.answer for r in recs], dtype=float)
        truth = recs[0].truth
        ci_low, ci_high = np.percentile(answers, [2.5, 97.5])
        rows.append(
            SummaryRow(
                mechanism=key[0],
                query=recs[0].query,
                rho=recs[0].rho,
                budget_fraction=key[1],
                mean=float(answers.mean()),
                ci_low=float(ci_low),
                ci_high=float(ci_high),
                rmse=float(np.sqrt(np.mean((answers - truth) ** 2))),
                mean_selected=float(np.mean([r.num_selected for r in recs])),
                mean_paid=float(np.mean([r.total_paid for r in recs])),
            )
        )
    return rows


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")


def write_outputs(config: ExperimentConfig, summaries, records):
    """Write summary.csv and trials.csv under the configured directory."""
    os.makedirs(config.output_dir, exist_ok=True)
    summary_path = os.path.join(config.output_dir, "summary.csv")
    trials_path = os.path.join(config.output_dir, "trials.csv")
    _write_csv(
        summary_path,
        SUMMARY_COLUMNS,
        [dataclasses.astuple(row) for row in summaries],
    )
    ordered = sorted(
        records, key=lambda r: (r.mechanism, r.budget_fraction, r.trial)
    )
    _write_csv(
        trials_path, TRIAL_COLUMNS, [dataclasses.astuple(r) for r in ordered]
    )
    return summary_path, trials_path


_SCHEMA_KEYS = {"value_column", "transform", "profile_columns", "delimiter"}
_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def config_from_file(path) -> ExperimentConfig:
    """Load an ExperimentConfig from a JSON file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if raw.get("schema") is not None:
        sch = raw["schema"]
        if not isinstance(sch, dict):
            raise ConfigError("schema must be a JSON object")
        unknown = sorted(set(sch) - _SCHEMA_KEYS)
        if unknown:
            raise ConfigError(f"unknown schema keys: {', '.join(unknown)}")
        if "value_column" not in sch:
            raise ConfigError("schema needs a value_column")
        raw = dict(raw)
        raw["schema"] = TableSchema(
            value_column=sch["value_column"],
            transform=sch.get("transform", "float"),
            profile_columns=tuple(sch.get("profile_columns", ())),
            delimiter=sch.get("delimiter", ","),
        )
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None
