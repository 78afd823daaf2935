"""
Drift of a repeated local measurement
=====================================

Repeating a weak s_z measurement on the left wing of a singlet, with the
literal operators A_up = (1-eps)|up><up| + eps|down><down| and
A_down = I - A_up. After a first "up", the second "up" becomes more likely:

    P(up | up) = ((1-eps)^3 + eps^3) / ((1-eps)^2 + eps^2)

Right-wing outcomes are spacelike to the left chain, so under the causal
engine they do not change these conditionals at all.
"""
from cqtsim.engines import enumerate_joint
from cqtsim.experiments import UP, drift_reference, preset_sequential_drift

for eps in (0.1, 0.01, 0.001):
    table = enumerate_joint(preset_sequential_drift(2, eps))
    value = table.conditional({"L2": UP}, {"L1": UP})
    print(f"eps={eps:<6g} P(L2 up | L1 up) = {value:.9f}   closed form {drift_reference(eps):.9f}")

table = enumerate_joint(preset_sequential_drift(2, 0.1))
for r in (0, 1):
    v = table.conditional({"L2": UP}, {"L1": UP, "R1": r, "R2": r})
    print(f"given R1=R2={'up' if r == 0 else 'down'}: {v:.9f}")
