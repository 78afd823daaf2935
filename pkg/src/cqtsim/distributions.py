"""Outcome tables: exact joint distributions and sampled run counts.

Both hold one row of outcome indices per distinct assignment, aligned with
``event_ids``, plus a weight per row (a probability or a count).
"""
from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["OutcomeTable", "JointDistribution", "RunStatistics"]


class OutcomeTable:
    def __init__(self, event_ids: Sequence[str], rows, weights,
                 labels: Mapping[str, Sequence[str]] | None = None):
        self.event_ids = tuple(event_ids)
        weights = np.asarray(weights)
        rows = np.asarray(rows, dtype=np.int64).reshape(weights.shape[0], len(self.event_ids))
        self.rows = rows
        self.weights = weights
        self.labels = {k: tuple(v) for k, v in (labels or {}).items()}

    def __len__(self) -> int:
        return self.rows.shape[0]

    def __iter__(self):
        for row, w in zip(self.rows, self.weights):
            yield dict(zip(self.event_ids, (int(v) for v in row))), w

    @property
    def total(self):
        return self.weights.sum()

    def probabilities(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def column(self, event_id: str) -> int:
        try:
            return self.event_ids.index(event_id)
        except ValueError:
            raise KeyError(f"unknown event {event_id!r}") from None

    def _mask(self, given: Mapping[str, int]) -> np.ndarray:
        mask = np.ones(len(self), dtype=bool)
        for eid, val in given.items():
            mask &= self.rows[:, self.column(eid)] == val
        return mask

    def marginal(self, event_ids: str | Iterable[str]) -> dict[tuple[int, ...], float]:
        """Normalized marginal over a subset of events, keyed by outcome tuples."""
        if isinstance(event_ids, str):
            event_ids = [event_ids]
        cols = [self.column(e) for e in event_ids]
        out: dict[tuple[int, ...], float] = {}
        p = self.probabilities()
        for row, w in zip(self.rows[:, cols], p):
            key = tuple(int(v) for v in row)
            out[key] = out.get(key, 0.0) + float(w)
        return dict(sorted(out.items()))

    def probability_of(self, partial: Mapping[str, int]) -> float:
        """Normalized probability that the events take the given outcomes."""
        return float(self.probabilities()[self._mask(partial)].sum())

    def conditional(self, target: Mapping[str, int], given: Mapping[str, int]) -> float:
        """``P(target | given)``."""
        denom = self.probability_of(given)
        if denom == 0:
            raise ZeroDivisionError(f"conditioning event {dict(given)} has zero weight")
        return self.probability_of({**given, **target}) / denom

    def label_row(self, row) -> dict[str, str]:
        out = {}
        for eid, v in zip(self.event_ids, row):
            names = self.labels.get(eid)
            out[eid] = names[int(v)] if names else str(int(v))
        return out


class JointDistribution(OutcomeTable):
    """Exact table of outcome assignments and their probabilities."""

    def probability(self, assignment: Mapping[str, int]) -> float:
        if set(assignment) != set(self.event_ids):
            raise KeyError("assignment must cover every event")
        return float(self.weights[self._mask(assignment)].sum())

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in r): float(w) for r, w in zip(self.rows, self.weights)}


class RunStatistics(OutcomeTable):
    """Empirical counts of sampled outcome assignments."""

    @classmethod
    def from_samples(cls, event_ids, samples: np.ndarray, labels=None) -> "RunStatistics":
        samples = np.asarray(samples, dtype=np.int64)
        if samples.shape[0] == 0:
            return cls(event_ids, np.zeros((0, len(event_ids))), np.zeros(0, dtype=np.int64),
                       labels)
        if not event_ids:
            return cls(event_ids, np.zeros((1, 0)), np.array([samples.shape[0]]), labels)
        rows, counts = np.unique(samples, axis=0, return_counts=True)
        return cls(event_ids, rows, counts.astype(np.int64), labels)

    @property
    def runs(self) -> int:
        return int(self.weights.sum())

    def counts(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in r): int(c) for r, c in zip(self.rows, self.weights)}

    def merge(self, other: "RunStatistics") -> "RunStatistics":
        """Combine counts from two batches of runs of the same experiment."""
        if other.event_ids != self.event_ids:
            raise ValueError("cannot merge statistics of different experiments")
        merged = self.counts()
        for k, c in other.counts().items():
            merged[k] = merged.get(k, 0) + c
        keys = sorted(merged)
        rows = np.array(keys, dtype=np.int64).reshape(len(keys), len(self.event_ids))
        return RunStatistics(self.event_ids, rows,
                             np.array([merged[k] for k in keys], dtype=np.int64),
                             self.labels or other.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RunStatistics):
            return NotImplemented
        return self.event_ids == other.event_ids and self.counts() == other.counts()
