"""Discrete LIF and LI neurons with dt = tau = 1 ms."""

import numpy as np

from spikebp.neurons import LifParams, LifState, LiState, li_step, lif_step, min_firing_drive

p = LifParams()
d = p.decay_m
print(f"decay factor d = {d:.6f}")

# a drive of 10 reaches the potential one step late, then fires at once
s = LifState.zeros()
for k in range(3):
    s, spiked = lif_step(s, p, 10.0 if k == 0 else 0.0)
    print(f"step {k + 1}: v={s.v:.4f} i={s.i:.4f} spike={spiked}")

# LI neuron under a constant input settles at u*d/(1-d)^2
u = 1.0
li = LiState.zeros()
trace = []
for _ in range(15):
    li = li_step(li, p, u)
    trace.append(li.v)
print("LI trace:", np.round(trace, 4))
print(f"fixed point {u * d / (1 - d) ** 2:.4f}")

# smallest constant drive that fires within S steps from rest
for steps in (1, 2, 3, 4):
    print(f"S={steps}: min drive {min_firing_drive(p, steps):.4f}")
print(f"resolvable margin with gain 10 and S=3: {min_firing_drive(p, 3) / 10:.4f}")
