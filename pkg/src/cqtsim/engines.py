"""Outcome-assignment rules for localized measurements.

Both engines walk the events in a linear extension of the causal order and
assign each event a conditional outcome distribution computed from the
initial state updated by the Kraus operators of *some* earlier outcomes:

``standard``
    every earlier event in the foliation order (lab time ``t``, ties by id);
``causal``
    only the events in the closed past light cone of the measured event.

Everything else (state updates, local density matrices, the probability
rule of the model) is shared. Dynamics between measurements is the identity;
a unitary evolution law would be applied in :meth:`Conditioner.initial_state`.
"""
from __future__ import annotations

import dataclasses
import itertools
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .distributions import JointDistribution, RunStatistics
from .models import MeasurementModel
from .qcore import (
    ConfigurationError,
    QuantumState,
    apply_kraus_update,
    local_density_matrix,
)
from .spacetime import (
    SpacetimeEvent,
    causally_precedes,
    topological_order,
    validate_locality,
)

__all__ = [
    "ENGINES",
    "ExperimentSpec",
    "Conditioner",
    "conditional_state",
    "conditional_state_causal",
    "conditional_state_standard",
    "joint_probability",
    "joint_probability_causal",
    "joint_probability_standard",
    "enumerate_joint",
    "sample_runs",
    "ENUMERATION_CAP",
    "BLOCK_SIZE",
]

ENGINES = ("standard", "causal")
ENUMERATION_CAP = 2**20
BLOCK_SIZE = 4096
STATE_CACHE_BYTES = 512 * 2**20


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    """Initial state, measurement events and the engine that assigns outcomes."""

    initial_state: QuantumState
    events: tuple[SpacetimeEvent, ...]
    models: Mapping[str, MeasurementModel]
    engine: str = "causal"
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "models", dict(self.models))
        if self.engine not in ENGINES:
            raise ConfigurationError(f"unknown engine {self.engine!r}; expected one of {ENGINES}")
        self.initial_state.validate()
        dims = self.initial_state.factor_dims
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"event ids are not unique: {ids}")
        if len({len(e.x) for e in self.events}) > 1:
            raise ConfigurationError("events have different spatial dimensions")
        for e in self.events:
            if e.model not in self.models:
                raise ConfigurationError(f"event {e.id!r} references unknown model {e.model!r}")
            if not 0 <= e.factor_index < len(dims):
                raise ConfigurationError(
                    f"event {e.id!r} targets factor {e.factor_index} of {len(dims)}")
            if self.models[e.model].dim != dims[e.factor_index]:
                raise ConfigurationError(
                    f"event {e.id!r}: model {e.model!r} has dimension "
                    f"{self.models[e.model].dim}, factor {e.factor_index} has {dims[e.factor_index]}")
        topological_order(self.events)  # rejects coincident events on one factor
        if self.engine == "causal":
            report = validate_locality(self.events)
            if not report.ok:
                raise ConfigurationError(f"causal engine requires locality: {report}")

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return self.initial_state.factor_dims

    @property
    def event_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.events)

    def event(self, event_id: str) -> SpacetimeEvent:
        for e in self.events:
            if e.id == event_id:
                return e
        raise KeyError(f"unknown event {event_id!r}")

    def model_of(self, event: SpacetimeEvent) -> MeasurementModel:
        return self.models[event.model]

    def with_engine(self, engine: str) -> "ExperimentSpec":
        return dataclasses.replace(self, engine=engine)

    def outcome_counts(self) -> list[int]:
        return [len(self.models[e.model]) for e in self.events]

    def labels(self) -> dict[str, tuple[str, ...]]:
        return {e.id: self.models[e.model].labels for e in self.events}


class Conditioner:
    """Conditional outcome distributions for one experiment under one engine.

    Parameters
    ----------
    spec : ExperimentSpec
    order : sequence of event ids, optional
        Processing order. Must be a linear extension of the causal order;
        defaults to ``topological_order`` (time, then id).
    engine : str, optional
        Overrides ``spec.engine``.
    """

    def __init__(self, spec: ExperimentSpec, order: Sequence[str] | None = None,
                 engine: str | None = None):
        self.spec = spec
        self.engine = engine or spec.engine
        if self.engine not in ENGINES:
            raise ConfigurationError(f"unknown engine {self.engine!r}")
        if self.engine == "causal":
            report = validate_locality(spec.events)
            if not report.ok:
                raise ConfigurationError(f"causal engine requires locality: {report}")
        events = spec.events
        index = {e.id: i for i, e in enumerate(events)}
        if order is None:
            self.order = [index[e.id] for e in topological_order(events)]
        else:
            self.order = [index[eid] for eid in order]
            if sorted(self.order) != list(range(len(events))):
                raise ConfigurationError("order must list every event exactly once")
            pos = {k: p for p, k in enumerate(self.order)}
            for a, b in itertools.permutations(range(len(events)), 2):
                if causally_precedes(events[a], events[b]) and pos[a] > pos[b]:
                    raise ConfigurationError(
                        f"order is not a linear extension: {events[a].id!r} precedes {events[b].id!r}")
        self.conditioning: dict[int, tuple[int, ...]] = {}
        for p, k in enumerate(self.order):
            earlier = self.order[:p]
            if self.engine == "causal":
                earlier = [j for j in earlier if causally_precedes(events[j], events[k])]
            self.conditioning[k] = tuple(earlier)
        used = set(itertools.chain.from_iterable(self.conditioning.values()))
        self.needed_later = [k in used for k in range(len(events))]
        self._states: OrderedDict[tuple, QuantumState] = OrderedDict()
        self._state_bytes = 0
        self._dists: dict[tuple, np.ndarray] = {}
        self._locals = [(e.factor_index, spec.models[e.model]) for e in events]

    def initial_state(self) -> QuantumState:
        # identity dynamics; a unitary evolution hook would act here
        return self.spec.initial_state

    def _remember(self, key: tuple, state: QuantumState) -> None:
        self._states[key] = state
        self._state_bytes += state.data.nbytes
        while self._state_bytes > STATE_CACHE_BYTES and len(self._states) > 1:
            _, old = self._states.popitem(last=False)
            self._state_bytes -= old.data.nbytes

    def state_for(self, history: tuple[tuple[int, int], ...]) -> QuantumState:
        """State after applying the updates ``(event index, outcome)`` in order."""
        if not history:
            return self.initial_state()
        if history in self._states:
            self._states.move_to_end(history)
            return self._states[history]
        start = len(history) - 1
        while start > 0 and history[:start] not in self._states:
            start -= 1
        state = self._states[history[:start]] if start else self.initial_state()
        for n in range(start, len(history)):
            k, o = history[n]
            factor, model = self._locals[k]
            state, _ = apply_kraus_update(state, model.outcomes[o], factor)
            self._remember(history[:n + 1], state)
        return state

    def history(self, k: int, outcomes: Mapping[int, int]) -> tuple[tuple[int, int], ...]:
        try:
            return tuple((j, int(outcomes[j])) for j in self.conditioning[k])
        except KeyError as err:
            raise RuntimeError(
                f"missing outcome for event {self.spec.events[err.args[0]].id!r} "
                f"needed to condition {self.spec.events[k].id!r}") from None

    def distribution(self, k: int, outcomes: Mapping[int, int]) -> np.ndarray:
        """Outcome probabilities of event ``k`` given the outcomes it conditions on."""
        hist = self.history(k, outcomes)
        key = (k, hist)
        dist = self._dists.get(key)
        if dist is None:
            factor, model = self._locals[k]
            rho = local_density_matrix(self.state_for(hist), factor)
            dist = model.probabilities(rho)
            self._dists[key] = dist
        return dist

    def conditional_state(self, k: int, outcomes: Mapping[int, int]) -> QuantumState:
        return self.state_for(self.history(k, outcomes))

    def joint_probability(self, outcomes: Mapping[int, int]) -> float:
        p = 1.0
        for k in self.order:
            p *= float(self.distribution(k, outcomes)[outcomes[k]])
        return p

    def enumerate(self, cap: int = ENUMERATION_CAP) -> JointDistribution:
        spec = self.spec
        counts = spec.outcome_counts()
        size = int(np.prod(counts, dtype=np.int64))
        if size > cap:
            raise ConfigurationError(
                f"{size} joint outcomes exceed the enumeration cap {cap}; use sampling instead")
        n = len(spec.events)
        rows = np.zeros((size, n), dtype=np.int64)
        probs = np.zeros(size)
        fill = 0
        assigned: dict[int, int] = {}

        def visit(p: int, weight: float):
            nonlocal fill
            if p == len(self.order):
                rows[fill] = [assigned[k] for k in range(n)]
                probs[fill] = weight
                fill += 1
                return
            k = self.order[p]
            dist = self.distribution(k, assigned)
            for o, q in enumerate(dist):
                assigned[k] = o
                visit(p + 1, weight * float(q))
            del assigned[k]

        visit(0, 1.0)
        return JointDistribution(spec.event_ids, rows, probs, spec.labels())

    def sample_block(self, uniforms: np.ndarray) -> np.ndarray:
        """Draw outcomes for a block of runs from per-event uniforms.

        ``uniforms[r, k]`` drives event ``k`` (in ``spec.events`` order) in run
        ``r``. Runs that agree on every outcome later events condition on are
        drawn together.
        """
        n_runs, n = uniforms.shape
        out = np.zeros((n_runs, n), dtype=np.int64)

        def visit(p: int, rows: np.ndarray, fixed: dict[int, int]):
            if p == len(self.order) or rows.size == 0:
                return
            k = self.order[p]
            cum = np.cumsum(self.distribution(k, fixed))
            draw = np.searchsorted(cum, uniforms[rows, k], side="right")
            draw = np.minimum(draw, cum.size - 1)
            out[rows, k] = draw
            if self.needed_later[k]:
                for o in np.unique(draw):
                    visit(p + 1, rows[draw == o], {**fixed, k: int(o)})
            else:
                visit(p + 1, rows, fixed)

        visit(0, np.arange(n_runs), {})
        return out


def _indexed(spec: ExperimentSpec, assignment) -> dict[int, int]:
    if isinstance(assignment, Mapping):
        index = {e.id: i for i, e in enumerate(spec.events)}
        try:
            return {index[eid]: int(o) for eid, o in assignment.items()}
        except KeyError as err:
            raise KeyError(f"unknown event {err.args[0]!r}") from None
    return {i: int(o) for i, o in enumerate(assignment)}


def _event_index(spec: ExperimentSpec, x) -> int:
    eid = x.id if isinstance(x, SpacetimeEvent) else x
    for i, e in enumerate(spec.events):
        if e.id == eid:
            return i
    raise KeyError(f"unknown event {eid!r}")


def conditional_state(spec: ExperimentSpec, x, partial, engine: str | None = None,
                      order: Sequence[str] | None = None) -> QuantumState:
    """State from which the outcome probabilities of event ``x`` are computed.

    ``partial`` maps event ids to outcome indices and must cover every event
    ``x`` conditions on under the engine; other entries are ignored.
    """
    cond = Conditioner(spec, order, engine)
    return cond.conditional_state(_event_index(spec, x), _indexed(spec, partial))


def conditional_state_causal(spec, x, partial, order=None) -> QuantumState:
    return conditional_state(spec, x, partial, "causal", order)


def conditional_state_standard(spec, x, partial, order=None) -> QuantumState:
    return conditional_state(spec, x, partial, "standard", order)


def joint_probability(spec: ExperimentSpec, assignment, engine: str | None = None,
                      order: Sequence[str] | None = None) -> float:
    """Probability of a complete outcome assignment.

    ``assignment`` is a mapping from event id to outcome index, or a sequence
    aligned with ``spec.events``.
    """
    outcomes = _indexed(spec, assignment)
    if set(outcomes) != set(range(len(spec.events))):
        raise KeyError("assignment must cover every event")
    return Conditioner(spec, order, engine).joint_probability(outcomes)


def joint_probability_causal(spec, assignment, order=None) -> float:
    return joint_probability(spec, assignment, "causal", order)


def joint_probability_standard(spec, assignment, order=None) -> float:
    return joint_probability(spec, assignment, "standard", order)


def enumerate_joint(spec: ExperimentSpec, cap: int = ENUMERATION_CAP,
                    engine: str | None = None) -> JointDistribution:
    """Exact joint distribution of all outcomes under ``engine`` (default ``spec.engine``)."""
    return Conditioner(spec, engine=engine).enumerate(cap)


def _block_uniforms(seed: int, block: int, n_runs: int, n_events: int) -> np.ndarray:
    # counter high word = block index, so blocks are disjoint Philox substreams
    bitgen = np.random.Philox(key=seed, counter=[0, block, 0, 0])
    return np.random.Generator(bitgen).random((n_runs, n_events))


def _run_blocks(spec: ExperimentSpec, engine: str, seed: int, blocks: list[tuple[int, int]]):
    cond = Conditioner(spec, engine=engine)
    n = len(spec.events)
    return [cond.sample_block(_block_uniforms(seed, b, size, n)) for b, size in blocks]


def sample_runs(spec: ExperimentSpec, runs: int, seed: int, engine: str | None = None,
                workers: int | None = None) -> RunStatistics:
    """Monte Carlo sampling of ``runs`` independent runs.

    Run ``r`` belongs to block ``r // BLOCK_SIZE``, and each block draws from
    its own counter-based Philox substream of ``seed``. Results therefore do
    not depend on ``workers``.
    """
    if runs < 1:
        raise ConfigurationError("runs must be a positive integer")
    if not 0 <= seed < 2**64:
        raise ConfigurationError("seed must be an unsigned 64-bit integer")
    engine = engine or spec.engine
    blocks = [(b, min(BLOCK_SIZE, runs - b * BLOCK_SIZE))
              for b in range(-(-runs // BLOCK_SIZE))]
    if workers and workers > 1 and len(blocks) > 1:
        chunks = [blocks[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_blocks, itertools.repeat(spec), itertools.repeat(engine),
                                  itertools.repeat(seed), chunks))
        by_block = {b: arr for chunk, part in zip(chunks, parts)
                    for (b, _), arr in zip(chunk, part)}
        samples = [by_block[b] for b, _ in blocks]
    else:
        samples = _run_blocks(spec, engine, seed, blocks)
    return RunStatistics.from_samples(spec.event_ids, np.concatenate(samples), spec.labels())
