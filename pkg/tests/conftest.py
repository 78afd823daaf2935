"""Shared helpers: random states, models and small random experiments."""
from __future__ import annotations

import numpy as np
import pytest

from cqtsim.engines import ExperimentSpec
from cqtsim.models import kraus_model
from cqtsim.qcore import QuantumState
from cqtsim.spacetime import SpacetimeEvent


def random_state(rng: np.random.Generator, dims, mixed: bool = False) -> QuantumState:
    n = int(np.prod(dims))
    if not mixed:
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        return QuantumState.from_vector(v, dims)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return QuantumState.from_density_matrix(rho / np.trace(rho), dims)


def random_kraus_family(rng: np.random.Generator, d: int, k: int) -> list[np.ndarray]:
    """``k`` full-rank Kraus operators on dimension ``d`` completed to a POVM.

    Random matrices ``G_i`` are rescaled by ``S^(-1/2)`` with
    ``S = sum G_i^dagger G_i`` so that the family is complete.
    """
    gs = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) + 2 * np.eye(d)
          for _ in range(k)]
    s = sum(g.conj().T @ g for g in gs)
    w, u = np.linalg.eigh(s)
    inv_sqrt = u @ np.diag(w ** -0.5) @ u.conj().T
    return [g @ inv_sqrt for g in gs]


def random_spec(rng: np.random.Generator, n_events: int, n_factors: int,
                engine: str = "causal", mixed: bool | None = None,
                dims=None) -> ExperimentSpec:
    """Random small experiment that satisfies the locality condition.

    Events are placed in 1+1 dimensions on a coarse grid; any spacelike pair
    that would share a factor is re-timed onto a timelike chain.
    """
    dims = dims or tuple(int(d) for d in rng.integers(2, 4, size=n_factors))
    if mixed is None:
        mixed = bool(rng.integers(2))
    state = random_state(rng, dims, mixed)
    models = {}
    for f, d in enumerate(dims):
        k = int(rng.integers(2, 4))
        models[f"m{f}"] = kraus_model(f"m{f}", random_kraus_family(rng, d, k))
    # one spatial site per factor keeps same-factor events timelike
    sites = rng.permutation(n_factors) * 3.0
    events = []
    for i in range(n_events):
        f = int(rng.integers(n_factors))
        t = float(rng.integers(0, 8)) + 0.1 * i
        events.append(SpacetimeEvent(f"e{i}", t, float(sites[f]), f, f"m{f}"))
    return ExperimentSpec(state, events, models, engine, "random")


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
