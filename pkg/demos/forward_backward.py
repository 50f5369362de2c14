"""
Forward and backward convergence to the autonomous limit
========================================================

As t grows the forcing perturbation dies out, so the pullback attractor
approaches the global attractor of the limit semigroup. The same happens
as t decreases, because the perturbation decays in both directions.
"""

# %%
import numpy as np

from pullback import engine, models as md

U = md.preset_s1()
S = U.semigroup()

# %%
fwd = engine.forward_convergence_experiment(
    U, S, np.arange(0.0, 10.01, 1.0), 1e-8, gap_t_grid=np.arange(0.0, 20.01, 2.0))
for t, d in zip(fwd.column("t"), fwd.column("semi_dist")):
    print(f"t={t:5.1f}  dist(A(t), A_inf)={d:.6e}  exact={np.exp(-t) * (t + 0.5):.6e}")
print("hypotheses:", fwd.hypotheses)

# %%
bwd = engine.backward_convergence_experiment(
    U, S, np.arange(-10.0, 0.01, 1.0), 1e-8, gap_t_grid=np.arange(-20.0, 0.01, 2.0))
for t, d in zip(bwd.column("t"), bwd.column("hausdorff_dist")):
    print(f"t={t:6.1f}  dist_H={d:.6e}  exact={np.exp(t) / 2:.6e}")
print("hypotheses:", bwd.hypotheses)
