"""Population generation and tabular data ingestion.

Valuations and privacy requirements are correlated uniforms produced by
a Gaussian copula; query columns come either from synthetic generators
or from delimiter-separated files with a declared schema.
"""

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .errors import EmptyDatasetError, InputError, ParseError, SchemaError


@dataclass(frozen=True)
class PopulationSpec:
    """How to draw the (valuation, privacy requirement) population."""

    n: int
    rho: float
    seed: int = 0
    theta_range: tuple = (0.0, 1.0)
    eps_range: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"population size must be >= 1, got {self.n}")
        if not -1.0 <= self.rho <= 0.0:
            raise InputError(
                f"correlation must lie in [-1, 0], got {self.rho}; positive "
                "values would mean privacy-hungry owners asking less"
            )
        for name, (lo, hi) in (
            ("theta_range", self.theta_range),
            ("eps_range", self.eps_range),
        ):
            if not lo < hi:
                raise InputError(f"{name} is empty: [{lo}, {hi}]")


def gen_correlated_uniforms(spec: PopulationSpec, rng=None):
    """Draw (theta, eps) with uniform marginals and Pearson correlation rho.

    rho = 0 gives independent draws and rho = -1 the exact complement
    eps = 1 - theta (in unit space).  In between, a Gaussian copula with
    normal correlation 2 sin(pi rho / 6) yields uniforms whose Pearson
    correlation is exactly rho.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.rho == 0.0:
        u = rng.random(n)
        v = rng.random(n)
    elif spec.rho == -1.0:
        u = rng.random(n)
        v = 1.0 - u
    else:
        rho_g = 2.0 * math.sin(math.pi * spec.rho / 6.0)
        z = rng.standard_normal((2, n))
        u = ndtr(z[0])
        v = ndtr(rho_g * z[0] + math.sqrt(1.0 - rho_g * rho_g) * z[1])
    t_lo, t_hi = spec.theta_range
    e_lo, e_hi = spec.eps_range
    theta = t_lo + (t_hi - t_lo) * u
    eps = e_lo + (e_hi - e_lo) * v
    # privacy requirements must be strictly positive
    eps = np.maximum(eps, np.nextafter(e_lo, e_hi))
    return theta, eps


# -- tabular ingestion -------------------------------------------------------


@dataclass(frozen=True)
class TableSchema:
    """Which columns to read and how to interpret the query column.

    transform: "float", "int", "distinct_int" (integers made mutually
    distinct, for median queries), or "binarize:<threshold>" (1.0 when
    the value exceeds the threshold).
    """

    value_column: str
    transform: str = "float"
    profile_columns: tuple = ()
    delimiter: str = ","


@dataclass(frozen=True)
class DistinctMapping:
    """Order-preserving map making duplicate integers distinct.

    Value v at duplicate rank j maps to v * scale + j.  Any mapped
    answer is restored with restore()."""

    scale: int
    adjusted: int

    def restore(self, x: float) -> float:
        return x / self.scale

    def restore_exact(self, x: int) -> int:
        return int(x) // self.scale


@dataclass(frozen=True)
class LoadedTable:
    values: np.ndarray
    profiles: Optional[np.ndarray]
    dropped_rows: int
    distinct_mapping: Optional[DistinctMapping] = None


def distinctify_integers(values) -> tuple:
    """Make integer values mutually distinct while preserving order.

    Returns the mapped values and the mapping needed to interpret
    answers on the original scale.
    """
    v = np.asarray(values)
    if np.any(v != np.floor(v)) or np.any(v < 1):
        raise InputError("distinctness repair needs positive integer values")
    v = v.astype(np.int64)
    scale = v.size
    ranks = np.zeros(v.size, dtype=np.int64)
    order = np.argsort(v, kind="stable")
    sorted_v = v[order]
    run_start = 0
    for i in range(1, v.size + 1):
        if i == v.size or sorted_v[i] != sorted_v[run_start]:
            ranks[order[run_start:i]] = np.arange(i - run_start)
            run_start = i
    adjusted = int(np.count_nonzero(ranks))
    return v * scale + ranks, DistinctMapping(scale, adjusted)


def _parse_transform(transform: str):
    if transform in ("float", "int", "distinct_int"):
        return transform, None
    if transform.startswith("binarize:"):
        try:
            return "binarize", float(transform.split(":", 1)[1])
        except ValueError:
            pass
    raise InputError(
        f"unknown transform {transform!r}; expected float, int, "
        "distinct_int, or binarize:<threshold>"
    )


def load_tabular(path, schema: TableSchema) -> LoadedTable:
    """Read a delimited text file with a header row.

    Rows with missing cells in the needed columns are dropped and
    counted; non-numeric cells raise with the offending line number.
    """
    kind, threshold = _parse_transform(schema.transform)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        needed = (schema.value_column,) + tuple(schema.profile_columns)
        indices = {}
        for name in needed:
            if name not in header:
                raise SchemaError(f"column {name!r} not found in {path}")
            indices[name] = header.index(name)
        values = []
        profiles = []
        dropped = 0
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            cells = []
            missing = False
            for name in needed:
                idx = indices[name]
                cell = row[idx].strip() if idx < len(row) else ""
                if not cell:
                    missing = True
                    break
                cells.append(cell)
            if missing:
                dropped += 1
                continue
            try:
                numbers = [float(c) for c in cells]
            except ValueError as exc:
                raise ParseError(f"{path}, line {line_no}: {exc}") from None
            values.append(numbers[0])
            profiles.append(numbers[1:])
    if not values:
        raise EmptyDatasetError(f"{path} contains no usable rows")

    raw = np.asarray(values, dtype=float)
    mapping = None
    if kind == "binarize":
        out = (raw > threshold).astype(float)
    elif kind in ("int", "distinct_int"):
        out = np.rint(raw)
        if kind == "distinct_int" and np.unique(out).size < out.size:
            mapped, mapping = distinctify_integers(out)
            out = mapped.astype(float)
    else:
        out = raw
    profile_arr = (
        np.asarray(profiles, dtype=float) if schema.profile_columns else None
    )
    return LoadedTable(out, profile_arr, dropped, mapping)


# -- synthetic query columns -------------------------------------------------


def gen_count_values(n: int, rate: float, rng) -> np.ndarray:
    """Binary column with the given expected rate of ones."""
    if not 0.0 <= rate <= 1.0:
        raise InputError(f"rate must be in [0, 1], got {rate}")
    return (rng.random(n) < rate).astype(float)


def gen_median_values(n: int, value_max: int, rng) -> np.ndarray:
    """Distinct positive integers concentrated around the middle.

    Draws a discretized normal (mean value_max/2, sd value_max/10) and
    keeps the first n distinct outcomes, mirroring real attributes such
    as ages, which cluster tightly relative to their declared range.
    """
    if n > value_max:
        raise InputError(
            f"cannot draw {n} distinct integers from [1, {value_max}]"
        )
    center = value_max / 2.0
    sd = value_max / 10.0
    seen = set()
    out = np.empty(n, dtype=float)
    filled = 0
    while filled < n:
        batch = np.rint(rng.normal(center, sd, size=max(n, 64)))
        for x in batch:
            xi = int(min(max(x, 1), value_max))
            if xi not in seen:
                seen.add(xi)
                out[filled] = xi
                filled += 1
                if filled == n:
                    break
    return out


def gen_linear_values(n: int, domain, rng) -> np.ndarray:
    lo, hi = domain
    if not lo < hi:
        raise InputError(f"value domain is empty: [{lo}, {hi}]")
    return lo + (hi - lo) * rng.random(n)


def gen_profiles(n: int, dim: int, rng):
    """Owner profile vectors plus a reference profile for similarity."""
    if dim < 1:
        raise InputError(f"profile dimension must be >= 1, got {dim}")
    profiles = rng.standard_normal((n, dim))
    reference = rng.standard_normal(dim)
    return profiles, reference
