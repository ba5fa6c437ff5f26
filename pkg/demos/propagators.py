# %% [markdown]
# # Propagators seen by different observers
#
# Erlang-2 waits, mildly right-biased exponential jumps.  The observer who
# arrives right after a jump, the one who arrives 1 time unit later and the
# stationary one all see different displacement laws over the same window.

# %%
import numpy as np

from ctrw import CtrwProcess, Erlang, JumpModel, after_jump_propagator, general_propagator, stationary_propagator
from ctrw.figures import fig3_rates

# %%
proc = CtrwProcess(Erlang(2, 1.0), JumpModel(1.0, 0.1))
tau = 2.0
results = {
    "after jump": after_jump_propagator(proc, tau),
    "lag r = 1": general_propagator(proc, 1.0, tau),
    "stationary": stationary_propagator(proc, tau),
}
x = results["after jump"].x_grid
for name, res in results.items():
    mean = np.trapezoid(x * res.density, x)
    print(f"{name:11s} P(no jump) = {res.delta_weight:.4f}   mean shift = {mean:.4f}   mass = {res.mass():.6f}")

# %% [markdown]
# The figure-3 parameter choice: each Erlang rate keeps P(no jump) = e^-2.

# %%
print("rates for nu = 1..4:", np.round(fig3_rates(), 4))
