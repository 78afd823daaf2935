"""Causal structure of measurement events in Minkowski space (c = 1).

The past light cone is taken to be closed: an event on the lightlike
boundary of another's past cone can influence it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .qcore import ConfigurationError

__all__ = [
    "SpacetimeEvent",
    "LocalityReport",
    "causally_precedes",
    "spacelike_separated",
    "past_cone",
    "topological_order",
    "validate_locality",
]


@dataclass(frozen=True)
class SpacetimeEvent:
    """A point-like measurement.

    ``x`` holds the spatial coordinates; a bare number is accepted for
    one spatial dimension. ``model`` names the measurement model attached to
    the event and ``factor_index`` the tensor factor it acts on.
    """

    id: str
    t: float
    x: tuple[float, ...]
    factor_index: int
    model: str = ""

    def __post_init__(self):
        x = self.x
        if isinstance(x, (int, float)):
            x = (x,)
        object.__setattr__(self, "x", tuple(float(v) for v in x))
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "factor_index", int(self.factor_index))

    @property
    def coords(self) -> tuple[float, ...]:
        return (self.t, *self.x)


def _check_dim(a: SpacetimeEvent, b: SpacetimeEvent) -> None:
    if len(a.x) != len(b.x):
        raise ConfigurationError(
            f"events {a.id!r} and {b.id!r} have spatial dimensions {len(a.x)} and {len(b.x)}"
        )


def causally_precedes(a: SpacetimeEvent, b: SpacetimeEvent) -> bool:
    """True iff ``a`` lies in the closed past light cone of ``b`` and a != b."""
    _check_dim(a, b)
    if a.coords == b.coords:
        return False
    return b.t - a.t >= math.dist(a.x, b.x)


def spacelike_separated(a: SpacetimeEvent, b: SpacetimeEvent) -> bool:
    """Neither event precedes the other. Coincident distinct events count as spacelike."""
    if a == b:
        return False
    return not causally_precedes(a, b) and not causally_precedes(b, a)


def past_cone(x: SpacetimeEvent, events: Iterable[SpacetimeEvent]) -> frozenset[SpacetimeEvent]:
    return frozenset(e for e in events if causally_precedes(e, x))


def topological_order(events: Sequence[SpacetimeEvent]) -> list[SpacetimeEvent]:
    """Linear extension of the causal order, ties broken by ``(t, id)``.

    ``a`` preceding ``b`` forces ``t_a < t_b`` strictly, so sorting on the
    key is already a valid linear extension.
    """
    seen: dict[tuple, str] = {}
    for e in events:
        key = (e.coords, e.factor_index)
        if key in seen:
            raise ConfigurationError(
                f"events {seen[key]!r} and {e.id!r} share coordinates and factor {e.factor_index}"
            )
        seen[key] = e.id
    return sorted(events, key=lambda e: (e.t, e.id))


@dataclass
class LocalityReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        pairs = ", ".join(f"({a}, {b})" for a, b in self.violations)
        return f"spacelike events acting on the same factor: {pairs}"


def validate_locality(experiment) -> LocalityReport:
    """Check that mutually spacelike events act on distinct factors.

    ``experiment`` is either an object with an ``events`` attribute or a
    sequence of events.
    """
    events = list(getattr(experiment, "events", experiment))
    report = LocalityReport()
    for i, a in enumerate(events):
        for b in events[i + 1:]:
            if a.factor_index == b.factor_index and spacelike_separated(a, b):
                report.violations.append((a.id, b.id))
    return report
