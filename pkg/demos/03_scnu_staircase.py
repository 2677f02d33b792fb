"""Transfer curve of the spiking check-node update, closed form and emulated."""

import numpy as np

from spikebp import ScnuConfig, characterize_scnu, resolvable_margin
from spikebp.checknode import scnu_snn_raw

grid = np.linspace(0.0, 5.0, 11)
for levels in (1, 2, 4):
    table = characterize_scnu(ScnuConfig(levels=levels, theta1=1.0, theta2=1.0), grid)
    print(f"L={levels}:", table[:, 1])

# the neuron emulation matches the closed form away from the thresholds
cfg = ScnuConfig(levels=4, theta1=1.0, theta2=1.0, backend="snn")
eps = resolvable_margin(cfg)
m = np.array([0.5, 1.5, 2.5, 3.5, 4.5, 1.0 - eps / 2])
emulated, _ = scnu_snn_raw(np.column_stack([m, np.full_like(m, 99.0)]), cfg)
print("margin eps =", round(eps, 4))
print("closed form:", characterize_scnu(cfg, m)[:, 1])
print("emulated:   ", emulated)
# the last input sits inside the unresolvable band just below a threshold
