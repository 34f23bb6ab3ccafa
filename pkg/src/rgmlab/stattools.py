"""Estimates with standard errors and a pooled two-sample chi-square test."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

DEFAULT_CI = 0.99
MIN_EXPECTED = 5.0
MIN_COVERED = 0.8


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    trials: int
    ci_level: float = DEFAULT_CI

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")
        if self.trials < 1:
            raise ValueError("an estimate needs at least one trial")

    @property
    def interval(self):
        z = stats.norm.ppf(0.5 + self.ci_level / 2)
        return (self.mean - z * self.std_error, self.mean + z * self.std_error)

    def within(self, value, k=3.0):
        return abs(self.mean - value) <= k * self.std_error

    def to_dict(self):
        return asdict(self)


def mean_estimate(values, ci_level=DEFAULT_CI):
    x = np.asarray(values, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return Estimate(float(x.mean()), se, len(x), ci_level)


def wilson_interval(successes, trials, ci_level=DEFAULT_CI):
    z = stats.norm.ppf(0.5 + ci_level / 2)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return centre - half, centre + half


def proportion_estimate(indicators, ci_level=DEFAULT_CI):
    """Sample proportion; the standard error is the Wilson half-width divided by ``z``."""
    x = np.asarray(indicators, dtype=bool)
    t = len(x)
    k = int(x.sum())
    lo, hi = wilson_interval(k, t, ci_level)
    z = stats.norm.ppf(0.5 + ci_level / 2)
    return Estimate(k / t, (hi - lo) / (2 * z), t, ci_level)


@dataclass
class ChiSquareResult:
    adequate: bool
    statistic: float
    dof: int
    p_value: float
    bins: list

    def to_dict(self):
        return asdict(self)


def two_sample_chi2(labels_a, labels_b):
    """Homogeneity test of two samples of hashable outcomes.

    Bins whose expected count (on either side) is below five are pooled into
    one ``other`` bin, which is folded into the smallest regular bin if it is
    itself too small. The table is *inadequate* when regular bins cover less
    than 80% of the observations; no test is run then.
    """
    ca, cb = Counter(labels_a), Counter(labels_b)
    ta, tb = sum(ca.values()), sum(cb.values())
    total = ta + tb
    keys = sorted(set(ca) | set(cb), key=repr)
    rows = [(k, ca.get(k, 0), cb.get(k, 0)) for k in keys]

    def expected_min(cnt):
        return cnt * min(ta, tb) / total

    regular = [r for r in rows if expected_min(r[1] + r[2]) >= MIN_EXPECTED]
    rare = [r for r in rows if expected_min(r[1] + r[2]) < MIN_EXPECTED]
    covered = sum(r[1] + r[2] for r in regular)
    if len(rows) == 1:
        bins = [{"bin": repr(rows[0][0]), "count_a": rows[0][1], "count_b": rows[0][2]}]
        return ChiSquareResult(True, 0.0, 0, 1.0, bins)
    if not regular or covered < MIN_COVERED * total:
        bins = [{"bin": repr(k), "count_a": a, "count_b": b} for k, a, b in rows]
        return ChiSquareResult(False, math.nan, 0, math.nan, bins)

    table = [[a, b] for _, a, b in regular]
    names = [repr(k) for k, _, _ in regular]
    if rare:
        oa = sum(r[1] for r in rare)
        ob = sum(r[2] for r in rare)
        if expected_min(oa + ob) >= MIN_EXPECTED:
            table.append([oa, ob])
            names.append("other")
        else:
            smallest = min(range(len(table)), key=lambda i: table[i][0] + table[i][1])
            table[smallest] = [table[smallest][0] + oa, table[smallest][1] + ob]
            names[smallest] = names[smallest] + "+other"
    bins = [{"bin": nm, "count_a": int(a), "count_b": int(b)} for nm, (a, b) in zip(names, table)]
    if len(table) == 1:
        return ChiSquareResult(True, 0.0, 0, 1.0, bins)
    res = stats.chi2_contingency(np.array(table).T, correction=False)
    return ChiSquareResult(True, float(res.statistic), int(res.dof), float(res.pvalue), bins)
