"""
Reversion once both wings are in the past cone
==============================================

Each wing runs a chain of three weak measurements, so local statistics
drift towards the first outcome. Later, each side measures once more at a
point whose past light cone contains every earlier outcome of both wings.
Under the causal engine the conditioning state is then the product of all
updates, and the local statistics return to one half.
"""
from cqtsim.engines import enumerate_joint
from cqtsim.experiments import UP, preset_reversion
from cqtsim.spacetime import past_cone

n, eps = 3, 0.01
spec = preset_reversion(n, eps)
post = spec.event("L_post")
print("past cone of L_post:", sorted(e.id for e in past_cone(post, spec.events)))

table = enumerate_joint(spec)
run = {f"L{k}": UP for k in range(1, n)}
print(f"P(L{n} up | earlier L all up) = {table.conditional({f'L{n}': UP}, run):.6f}")
for side in ("L", "R"):
    print(f"P({side}_post up) = {table.probability_of({f'{side}_post': UP}):.6f}")
