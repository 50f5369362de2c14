"""
A forced reaction-diffusion equation
====================================

u_t = u_xx - u - u^3 + g(x, t) on (-32, 32) with Dirichlet walls. The
limit problem has a single stable steady state which Newton finds
directly; the pullback slices approach it as t grows.
"""

# %%
import numpy as np

from pullback import engine, models as md

U = md.preset_r1()
S = U.semigroup()
steady = md.rd_steady_state(U.autonomous_limit())
print("steady state max:", steady.max())

# %%
# Energy and difference bounds along a trajectory started at zero.
tr = md.trajectory(U, 0.0, 10.0, np.zeros(U.N), stride=100)
print("energy bound excess:", md.energy_monitor(U, tr))
print("difference bound excess:", md.difference_monitor(U, np.zeros(U.N), 0.0, 10.0, stride=100))

# %%
# A smaller ensemble keeps this quick.
rep = engine.forward_convergence_experiment(
    U, S, [0.0, 2.0, 4.0, 6.0, 8.0], 1e-7, ensemble_size=8,
    gap_t_grid=np.arange(0.0, 20.01, 4.0))
for t, d in zip(rep.column("t"), rep.column("semi_dist")):
    print(f"t={t:4.1f}  dist={d:.3e}  radius bound={U.absorbing_radius(t):.3f}")
