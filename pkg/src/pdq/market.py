"""Core market model: owners, regular priors, and query descriptions.

Owners hold one data value each, a private valuation drawn from a known
regular prior, and a personal privacy requirement.  The analyst holds a
budget and wants to answer a single query.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateProfileError,
    InputError,
    SingularPriorError,
    WeightValidityError,
)

COUNT = "count"
MEDIAN = "median"
LINEAR = "linear"
QUERY_KINDS = (COUNT, MEDIAN, LINEAR)

_VALIDATION_GRID = 10_000
_CDF_TOL = 1e-9
_MONOTONE_TOL = -1e-9


@dataclass(frozen=True)
class RegularPrior:
    """Valuation prior with nondecreasing virtual cost.

    ``cdf`` and ``pdf`` must accept numpy arrays.  ``quantile`` and
    ``inverse_virtual_cost`` are optional closed forms; when absent the
    package falls back to bisection.
    """

    lower: float
    upper: float
    cdf: Callable
    pdf: Callable
    name: str = "custom"
    quantile: Optional[Callable] = None
    inverse_virtual_cost: Optional[Callable] = None

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise InputError("prior support must be finite")
        if not self.lower < self.upper:
            raise InputError(
                f"prior support is empty: [{self.lower}, {self.upper}]"
            )
        if self.lower < 0:
            raise InputError("valuations must be nonnegative")
        grid = np.linspace(self.lower, self.upper, _VALIDATION_GRID)
        cdf_vals = np.asarray(self.cdf(grid), dtype=float)
        if abs(cdf_vals[0]) > _CDF_TOL or abs(cdf_vals[-1] - 1.0) > _CDF_TOL:
            raise InputError("cdf must run from 0 at lower to 1 at upper")
        if np.any(np.diff(cdf_vals) < _MONOTONE_TOL):
            raise InputError("cdf must be nondecreasing")
        pdf_vals = np.asarray(self.pdf(grid[1:-1]), dtype=float)
        if np.any(pdf_vals <= 0.0):
            raise SingularPriorError(
                f"density of prior {self.name!r} is not strictly positive "
                "on the interior of its support"
            )
        vc = grid[1:-1] + cdf_vals[1:-1] / pdf_vals
        if np.any(np.diff(vc) < _MONOTONE_TOL):
            raise InputError(
                f"prior {self.name!r} is not regular: virtual cost "
                "decreases somewhere on the support"
            )


def virtual_cost(prior: RegularPrior, theta):
    """theta + F(theta)/f(theta), elementwise."""
    theta = np.asarray(theta, dtype=float)
    return theta + prior.cdf(theta) / prior.pdf(theta)


def virtual_cost_inverse(prior: RegularPrior, y):
    """Generalized inverse of the virtual cost, clamped to the support.

    Returns the smallest theta with virtual_cost(theta) >= y.  Uses the
    prior's closed form when available, otherwise vectorized bisection.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    if prior.inverse_virtual_cost is not None:
        out = np.clip(
            np.asarray(prior.inverse_virtual_cost(y), dtype=float),
            prior.lower,
            prior.upper,
        )
        return float(out[0]) if scalar else out
    lo = np.full(y.shape, prior.lower)
    hi = np.full(y.shape, prior.upper)
    # sign(vc(theta) - y) == sign(f(theta)(theta - y) + F(theta)); the
    # latter avoids dividing by a possibly tiny density at the lower end.
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        h = prior.pdf(mid) * (mid - y) + prior.cdf(mid)
        below = h < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


def prior_quantile(prior: RegularPrior, u):
    """Inverse cdf, by closed form or bisection."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise InputError("quantile argument must lie in [0, 1]")
    if prior.quantile is not None:
        out = np.clip(
            np.asarray(prior.quantile(u), dtype=float), prior.lower, prior.upper
        )
        return float(out[0]) if scalar else out
    lo = np.full(u.shape, prior.lower)
    hi = np.full(u.shape, prior.upper)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = prior.cdf(mid) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out[0]) if scalar else out


def uniform_prior(lower: float = 0.0, upper: float = 1.0) -> RegularPrior:
    """Uniform prior on [lower, upper] with exact inverses."""
    lower = float(lower)
    upper = float(upper)
    if not lower < upper:
        raise InputError(f"uniform prior needs lower < upper, got [{lower}, {upper}]")
    width = upper - lower

    def cdf(t):
        return np.clip((np.asarray(t, dtype=float) - lower) / width, 0.0, 1.0)

    def pdf(t):
        return np.full(np.shape(np.asarray(t, dtype=float)), 1.0 / width)

    def quantile(u):
        return lower + width * np.asarray(u, dtype=float)

    # vc(t) = 2t - lower, so vc^{-1}(y) = (y + lower) / 2
    def inverse_vc(y):
        return 0.5 * (np.asarray(y, dtype=float) + lower)

    return RegularPrior(
        lower=lower,
        upper=upper,
        cdf=cdf,
        pdf=pdf,
        name=f"uniform[{lower},{upper}]",
        quantile=quantile,
        inverse_virtual_cost=inverse_vc,
    )


_PRIOR_FACTORIES = {"uniform": uniform_prior}


def get_prior(name: str, lower: float = 0.0, upper: float = 1.0) -> RegularPrior:
    try:
        factory = _PRIOR_FACTORIES[name]
    except KeyError:
        known = ", ".join(sorted(_PRIOR_FACTORIES))
        raise InputError(f"unknown prior {name!r}; known priors: {known}") from None
    return factory(lower, upper)


@dataclass(frozen=True)
class PrivacyAwareOwner:
    """One data owner: a data value, a valuation, and a privacy requirement."""

    data_value: float
    valuation: float
    privacy_req: float
    profile: Optional[tuple] = None

    def __post_init__(self):
        if not np.isfinite(self.valuation) or self.valuation < 0:
            raise InputError(f"valuation must be finite and >= 0, got {self.valuation}")
        if not np.isfinite(self.privacy_req) or self.privacy_req <= 0:
            raise InputError(
                f"privacy requirement must be finite and > 0, got {self.privacy_req}"
            )


@dataclass(frozen=True)
class Market:
    """A set of owners, the valuation prior, and the analyst's budget."""

    owners: tuple
    prior: RegularPrior
    budget: float

    def __post_init__(self):
        if len(self.owners) == 0:
            raise InputError("market needs at least one owner")
        if not np.isfinite(self.budget) or self.budget <= 0:
            raise InputError(f"budget must be finite and > 0, got {self.budget}")
        max_spend = self.prior.upper * len(self.owners)
        if self.budget > max_spend * (1 + 1e-12):
            raise InputError(
                f"budget {self.budget} exceeds the maximum useful spend "
                f"{max_spend}; no owner can be paid more than {self.prior.upper}"
            )
        for o in self.owners:
            if not (self.prior.lower <= o.valuation <= self.prior.upper):
                raise InputError(
                    f"valuation {o.valuation} outside prior support "
                    f"[{self.prior.lower}, {self.prior.upper}]"
                )

    @property
    def n(self) -> int:
        return len(self.owners)

    @cached_property
    def valuations(self) -> np.ndarray:
        return np.array([o.valuation for o in self.owners], dtype=float)

    @cached_property
    def privacy_reqs(self) -> np.ndarray:
        return np.array([o.privacy_req for o in self.owners], dtype=float)

    @cached_property
    def data_values(self) -> np.ndarray:
        return np.array([o.data_value for o in self.owners], dtype=float)


@dataclass(frozen=True)
class QuerySpec:
    """What the analyst wants to compute over the purchased data."""

    kind: str
    data_domain: tuple
    weights: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in QUERY_KINDS:
            raise InputError(
                f"unknown query kind {self.kind!r}; expected one of {QUERY_KINDS}"
            )
        lo, hi = self.data_domain
        if not lo < hi:
            raise InputError(f"data domain is empty: [{lo}, {hi}]")
        if self.kind == LINEAR:
            if self.weights is None:
                raise InputError("linear queries need a weight per owner")
            w = np.asarray(self.weights, dtype=float)
            if w.size == 0 or np.any(w == 0.0) or not np.all(np.isfinite(w)):
                raise WeightValidityError(
                    "linear query weights must be finite and nonzero"
                )
        elif self.weights is not None:
            raise InputError(f"{self.kind} queries do not take weights")


def cosine_weights(profiles: Sequence, reference) -> np.ndarray:
    """Cosine similarity of each profile against a reference profile.

    Used to derive linear query weights from owner metadata.  Raises if
    any profile (or the reference) has zero norm, or if some similarity
    comes out exactly zero, since zero weights make an owner's data
    irrelevant to the query.
    """
    ref = np.asarray(reference, dtype=float)
    ref_norm = np.linalg.norm(ref)
    if ref_norm == 0.0:
        raise DegenerateProfileError("reference profile has zero norm")
    mat = np.asarray(profiles, dtype=float)
    if mat.ndim != 2 or mat.shape[1] != ref.size:
        raise InputError(
            f"profiles must be shaped (n, {ref.size}), got {mat.shape}"
        )
    norms = np.linalg.norm(mat, axis=1)
    bad = np.nonzero(norms == 0.0)[0]
    if bad.size:
        raise DegenerateProfileError(f"profile {bad[0]} has zero norm")
    weights = mat @ ref / (norms * ref_norm)
    if np.any(weights == 0.0):
        raise WeightValidityError(
            "a profile is orthogonal to the reference; its weight would be zero"
        )
    return weights
