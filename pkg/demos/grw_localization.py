"""
Gaussian localization on a lattice
==================================

A GRW-style measurement multiplies the wavefunction by a Gaussian of width
``a`` around a randomly chosen centre. Here a flat wavefunction is localized
and the fraction of probability within 2a of the centre is printed.
"""
import numpy as np

from cqtsim.models import LatticeGrid, LatticeWavefunction, grw_localization_model
from cqtsim.qcore import QuantumState, apply_kraus_update, outcome_probability

grid = LatticeGrid(-10.0, 10.0, 201)
a = 1.0
model = grw_localization_model(a, grid)
flat = LatticeWavefunction(grid, np.ones(grid.n_points))
state = QuantumState.from_vector(flat.to_vector(), [grid.n_points])

probs = np.array([outcome_probability(state, op, 0) for op in model.outcomes])
print(f"sum of centre probabilities: {probs.sum():.12f}")

centre = 100
post, weight = apply_kraus_update(state, model.outcomes[centre], 0)
dens = np.abs(post.data) ** 2
x0 = grid.points[centre]
inside = dens[np.abs(grid.points - x0) <= 2 * a].sum()
print(f"centre x0={x0:g}: weight {weight:.4e}, probability within 2a = {inside:.4f}")
