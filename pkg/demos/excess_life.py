# %% [markdown]
# # Waiting for the next jump
#
# A walk observed `r` after one of its jumps has to wait `tau_r` for the
# next one.  Only exponential waits make that delay independent of `r`.

# %%
import numpy as np

from ctrw import Erlang, Exponential, GammaRational, RenewalFunction, StationaryExcess, excess_law

# %%
waits = {"exponential": Exponential(1.0), "erlang 2": Erlang(2, 2.0), "gamma 1/2": GammaRational(1, 2, 1.0)}
for name, w in waits.items():
    means = [excess_law(w, r).mean() for r in (0.0, 0.5, 2.0, 10.0)]
    print(f"{name:12s} mean wait {w.mean:.3f}   <tau_r> at r=0,0.5,2,10:", np.round(means, 4))
    print(f"{'':12s} stationary limit {StationaryExcess(w).mean():.4f}")

# %% [markdown]
# Erlang waits shorten the residual delay, shape 1/2 lengthens it (the
# inspection paradox).  The renewal function behind these numbers:

# %%
t = np.array([0.1, 1.0, 5.0, 25.0])
for name, w in waits.items():
    rf = RenewalFunction(w)
    print(f"{name:12s} m(t) =", np.round([rf(x) for x in t], 6), " t/mu =", np.round(t / w.mean, 3))
