"""Summary statistics over outcome tables."""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _stats

from .distributions import JointDistribution, OutcomeTable, RunStatistics

__all__ = [
    "correlator",
    "chsh_S",
    "click_histogram",
    "click_moments",
    "total_variation",
    "poisson_reference",
    "chi_square_test",
]


def correlator(table: OutcomeTable, pair: tuple[str, str],
               values: Sequence[float] = (1.0, -1.0)) -> float:
    """``E(a, b) = sum p(i, j) v_i v_j`` with outcome values ``values``.

    The default maps outcome 0 to +1 and outcome 1 to -1.
    """
    a, b = pair
    vals = np.asarray(values, dtype=float)
    va = vals[table.rows[:, table.column(a)]]
    vb = vals[table.rows[:, table.column(b)]]
    return float(np.sum(table.probabilities() * va * vb))


def chsh_S(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    """``|E(a,b) - E(a,b') + E(a',b) + E(a',b')|``."""
    return abs(e_ab - e_abp + e_apb + e_apbp)


def _click_counts(table: OutcomeTable, click_outcome: int, event_ids) -> np.ndarray:
    cols = [table.column(e) for e in (event_ids or table.event_ids)]
    return (table.rows[:, cols] == click_outcome).sum(axis=1)


def click_histogram(table: OutcomeTable, click_outcome: int = 1,
                    event_ids: Sequence[str] | None = None) -> np.ndarray:
    """Distribution of the number of events showing ``click_outcome``.

    Entry ``n`` is the (normalized) probability of exactly ``n`` clicks.
    """
    n_events = len(event_ids or table.event_ids)
    clicks = _click_counts(table, click_outcome, event_ids)
    hist = np.bincount(clicks, weights=table.probabilities(), minlength=n_events + 1)
    return hist


def click_moments(table: OutcomeTable, click_outcome: int = 1,
                  event_ids: Sequence[str] | None = None) -> tuple[float, float]:
    """Mean and variance of the click count."""
    clicks = _click_counts(table, click_outcome, event_ids).astype(float)
    p = table.probabilities()
    mean = float(np.sum(p * clicks))
    return mean, float(np.sum(p * (clicks - mean) ** 2))


def total_variation(p, q) -> float:
    """Half the l1 distance between two distributions on the same support.

    Accepts equal-length arrays or mappings with identical key sets.
    """
    if isinstance(p, Mapping) or isinstance(q, Mapping):
        if not (isinstance(p, Mapping) and isinstance(q, Mapping)) or set(p) != set(q):
            raise ValueError("distributions have mismatched supports")
        keys = sorted(p)
        p = [p[k] for k in keys]
        q = [q[k] for k in keys]
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"distributions have mismatched supports {p.shape} and {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def poisson_reference(n):
    """Poisson(1) probability ``exp(-1) / n!``; ``n`` may be an int or array."""
    if np.ndim(n) == 0:
        return math.exp(-1) / math.factorial(int(n))
    return np.array([math.exp(-1) / math.factorial(int(k)) for k in np.asarray(n)])


def chi_square_test(sampled: RunStatistics, exact: JointDistribution,
                    min_expected: float = 5.0) -> tuple[float, int, float]:
    """Pearson goodness-of-fit of sampled counts against an exact distribution.

    Cells with expected count below ``min_expected`` are pooled into one
    cell. Returns ``(statistic, degrees of freedom, p-value)``.
    """
    if sampled.event_ids != exact.event_ids:
        raise ValueError("tables describe different experiments")
    runs = sampled.runs
    observed = sampled.counts()
    expected = {k: runs * p for k, p in exact.as_dict().items()}
    unknown = set(observed) - set(expected)
    if unknown:
        raise ValueError(f"sampled assignments absent from the exact table: {sorted(unknown)[:3]}")
    big = [k for k, e in expected.items() if e >= min_expected]
    small = [k for k, e in expected.items() if e < min_expected]
    obs = [observed.get(k, 0) for k in big]
    exp = [expected[k] for k in big]
    if small:
        pooled = sum(expected[k] for k in small)
        if pooled > 0:
            obs.append(sum(observed.get(k, 0) for k in small))
            exp.append(pooled)
    obs = np.asarray(obs, dtype=float)
    exp = np.asarray(exp, dtype=float)
    dof = len(obs) - 1
    if dof < 1:
        return 0.0, 0, 1.0
    stat = float(np.sum((obs - exp) ** 2 / exp))
    return stat, dof, float(_stats.chi2.sf(stat, dof))
