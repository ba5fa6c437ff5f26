# %% [markdown]
# # Leaving an interval
#
# Mean time to exit [0, 4] from the midpoint, for Erlang-2 waits, checked
# against simulation for a few observation lags.

# %%
import numpy as np

from ctrw import CtrwProcess, Erlang, ExitProblem, JumpModel, mean_exit_time, met_correction, solve_after_jump_met
from ctrw import mc

# %%
proc = CtrwProcess(Erlang(2, 1.0), JumpModel(1.0))
problem = ExitProblem(proc, 0.0, 4.0)
sol = solve_after_jump_met(problem)
print("T after a jump on a coarse grid:", np.round(sol(np.linspace(0, 4, 9)), 4))

# %%
for r in (0.0, 0.5, 1.0, 2.0):
    est = mc.estimate_met(proc, 0.0, 4.0, 2.0, r, 50_000, seed=1, key=int(10 * r))
    T = mean_exit_time(problem, 2.0, r, sol)
    print(f"r={r:3.1f}  correction {met_correction(proc.waiting, r):+.4f}  T={T:.4f}  MC {est.mean:.4f} +- {est.se:.4f}")
