import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqtsim.models import (
    LatticeGrid,
    LatticeWavefunction,
    box_detector_model,
    epsilon_spin_model,
    grw_localization_model,
    kraus_model,
    spin_projectors,
    verify_measurement_model,
)
from cqtsim.qcore import ConfigurationError, QuantumState, apply_kraus_update, outcome_probability

INSIDE = np.diag([0.0, 1.0])
OUTSIDE = np.diag([1.0, 0.0])


def test_literal_spin_matrices():
    m = epsilon_spin_model(0.1, variant="literal")
    np.testing.assert_allclose(m.outcomes[0].matrix, np.diag([0.9, 0.1]), atol=1e-15)
    np.testing.assert_allclose(m.outcomes[1].matrix, np.diag([0.1, 0.9]), atol=1e-15)
    assert m.rule == "effect"


def test_literal_pair_is_not_kraus_complete():
    m = epsilon_spin_model(0.1, variant="literal")
    mats = [op.matrix for op in m.outcomes]
    total = sum(a.conj().T @ a for a in mats)
    np.testing.assert_allclose(total, np.diag([0.82, 0.82]), atol=1e-15)
    defects = verify_measurement_model(mats, rule="kraus")
    assert [d.kind for d in defects] == ["completeness"]
    assert defects[0].margin == pytest.approx(0.18, abs=1e-12)
    # as effects the pair sums to the identity
    assert verify_measurement_model(m) == []


def test_povm_spin_is_complete_and_matches_literal_probabilities():
    povm = epsilon_spin_model(0.1)
    mats = [op.matrix for op in povm.outcomes]
    np.testing.assert_allclose(sum(a.conj().T @ a for a in mats), np.eye(2), atol=1e-15)
    lit = epsilon_spin_model(0.1, variant="literal")
    rho = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    np.testing.assert_allclose(povm.probabilities(rho), lit.probabilities(rho), atol=1e-15)


@pytest.mark.parametrize("eps", [0.02, 0.1, 0.3])
def test_rotated_spin_weights_plus_minus(eps):
    m = epsilon_spin_model(eps, np.pi / 2, variant="literal")
    plus, minus = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
    expected = (1 - eps) * np.outer(plus, plus) + eps * np.outer(minus, minus)
    np.testing.assert_allclose(m.outcomes[0].matrix, expected, atol=1e-15)


def test_spin_projectors_resolve_identity():
    up, down = spin_projectors(0.7)
    np.testing.assert_allclose(up + down, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(up @ up, up, atol=1e-15)


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, 1.0])
def test_spin_eps_range(eps):
    with pytest.raises(ConfigurationError):
        epsilon_spin_model(eps)


def test_box_detector_trace_conditions():
    m = box_detector_model(0.01)
    a0, a1 = (op.matrix for op in m.outcomes)
    assert np.trace(a1 @ INSIDE @ a1.conj().T).real == pytest.approx(0.99, abs=1e-15)
    assert np.trace(a1 @ OUTSIDE @ a1.conj().T).real == pytest.approx(0.01, abs=1e-15)
    assert np.trace(a0 @ OUTSIDE @ a0.conj().T).real == pytest.approx(0.99, abs=1e-15)
    assert np.trace(a0 @ INSIDE @ a0.conj().T).real == pytest.approx(0.01, abs=1e-15)
    np.testing.assert_allclose(a0.conj().T @ a0 + a1.conj().T @ a1, np.eye(2), atol=1e-15)
    assert verify_measurement_model(m) == []


def test_box_detector_preserves_support():
    for op in box_detector_model(0.2).outcomes:
        out_in = op.matrix @ np.array([0, 1])
        out_out = op.matrix @ np.array([1, 0])
        assert out_in[0] == 0 and out_out[1] == 0


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_box_eps_range(eps):
    with pytest.raises(ConfigurationError):
        box_detector_model(eps)


def test_projective_pair_rejected():
    pair = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    defects = verify_measurement_model(pair)
    assert sorted((d.kind, d.outcome) for d in defects) == [("singular", 0), ("singular", 1)]
    assert all(d.margin == 0 for d in defects)
    with pytest.raises(ConfigurationError, match="singular"):
        kraus_model("proj", pair)


GRID = LatticeGrid(-10.0, 10.0, 201)


def test_grw_completeness_and_positivity():
    m = grw_localization_model(1.0, GRID)
    total = sum(op.matrix.conj().T @ op.matrix for op in m.outcomes)
    assert np.abs(total - np.eye(GRID.n_points)).max() <= 1e-10
    assert min(np.diag(op.matrix).real.min() for op in m.outcomes) > 0
    assert verify_measurement_model(m) == []


@pytest.mark.parametrize("center", [80, 100, 120])
def test_grw_localizes_uniform_state(center):
    a = 1.0
    m = grw_localization_model(a, GRID)
    psi = LatticeWavefunction(GRID, np.ones(GRID.n_points))
    state = QuantumState.from_vector(psi.to_vector(), [GRID.n_points])
    post, _ = apply_kraus_update(state, m.outcomes[center], 0)
    x0 = GRID.points[center]
    post_wf = LatticeWavefunction.from_vector(GRID, post.data)
    dens = post_wf.density() * GRID.spacing
    assert dens.sum() == pytest.approx(1.0, abs=1e-10)
    assert dens[np.abs(GRID.points - x0) <= 2 * a].sum() >= 0.99


def test_grw_fixes_delta_state():
    m = grw_localization_model(1.0, GRID)
    vec = np.zeros(GRID.n_points)
    vec[57] = 1.0
    state = QuantumState.from_vector(vec, [GRID.n_points])
    post, w = apply_kraus_update(state, m.outcomes[57], 0)
    np.testing.assert_allclose(post.data, vec, atol=1e-15)
    assert w == pytest.approx(outcome_probability(state, m.outcomes[57], 0), abs=1e-15)


def test_grw_rejects_unresolved_width():
    with pytest.raises(ConfigurationError, match="resolvable"):
        grw_localization_model(0.15, GRID)
    with pytest.raises(ConfigurationError, match="8 points"):
        grw_localization_model(1.0, LatticeGrid(0, 1, 5))


def test_wavefunction_normalization():
    wf = LatticeWavefunction(GRID, np.exp(-GRID.points**2))
    assert (wf.density().sum() * GRID.spacing) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ConfigurationError):
        LatticeWavefunction(GRID, np.zeros(GRID.n_points))


@settings(max_examples=50, deadline=None)
@given(eps=st.floats(1e-6, 0.499), theta=st.floats(-np.pi, np.pi),
       variant=st.sampled_from(["povm", "literal"]))
def test_every_spin_model_is_valid(eps, theta, variant):
    m = epsilon_spin_model(eps, theta, variant)
    assert verify_measurement_model(m) == []
    rho = np.eye(2) / 2
    assert m.probabilities(rho).sum() == pytest.approx(1.0, abs=1e-12)
