# %% [markdown]
# # Phase locking
#
# Ten identical 6 Hz oscillators with all-to-all coupling pull together
# from random starting phases.

# %%
import numpy as np

from neurosyntax.signals import KuramotoNetwork, kuramoto_step, order_parameter

rng = np.random.default_rng(3)
net = KuramotoNetwork.all_to_all(np.full(10, 2 * np.pi * 6), 1.0, rng.uniform(0, 2 * np.pi, 10))
for step in range(5001):
    if step % 1000 == 0:
        print(f"t = {step * 1e-3:.1f} s  order parameter = {order_parameter(net.phases):.4f}")
    net = kuramoto_step(net, 1e-3)

# %% [markdown]
# Hopf-style merging of oscillatory states: amplitudes multiply, phases add.

# %%
from neurosyntax.hopf import HopfElement, comultiply, hopf_merge, iterate_merge

gamma, delta = HopfElement(2.0, 0.3), HopfElement(0.5, 1.1)
m = hopf_merge(gamma, delta)
a, b = comultiply(m)
print(f"merged: {m.amplitude:.2f} at {m.phase:.2f} rad, parts ({a.amplitude}, {a.phase}) and ({b.amplitude}, {b.phase})")
x3 = iterate_merge(gamma, delta, 3)
print(f"three feedback rounds: {x3.amplitude:.3f} at {x3.phase:.2f} rad")
