"""
One particle, many boxes
========================

A single particle is spread evenly over N spacelike boxes, each watched by a
detector of efficiency 1 - eps. Standard quantum theory predicts exactly one
click up to O(eps). The causal engine makes the boxes independent, so the
click count approaches a Poisson(1) law.
"""
import numpy as np

from cqtsim.engines import sample_runs
from cqtsim.experiments import preset_n_box
from cqtsim.statistics import click_histogram, click_moments, poisson_reference, total_variation

n, eps, runs = 20, 1e-4, 100_000
ref = poisson_reference(np.arange(7))
for engine in ("causal", "standard"):
    stats = sample_runs(preset_n_box(n, eps, engine=engine), runs, seed=2024)
    hist = click_histogram(stats)[:7]
    mean, var = click_moments(stats)
    print(f"{engine:>8}: P(n) for n<=6 = {np.round(hist, 4)}")
    print(f"          mean clicks {mean:.5f}, TV to Poisson(1) {total_variation(hist, ref):.4f}")
print(f"Poisson(1):           {np.round(ref, 4)}")
