"""
When the perturbation does not die out
======================================

With a constant perturbation h = 1 the forcing never settles to g0, so the
autonomy gap stays bounded away from zero and the pullback slices stay a
fixed distance from the limit attractor.
"""

# %%
import numpy as np

from pullback import conditions as cc, engine, forcing as fc, models as md

U = md.preset_s1(amplitude=fc.constant(1.0))
grid = np.arange(0.0, 20.01, 2.0)
print("forward tail verdict:", cc.tail_report("cond_g", U.forcing, grid).verdict)

# %%
rep = engine.forward_convergence_experiment(
    U, U.semigroup(), np.arange(0.0, 10.01, 2.0), 1e-8, gap_t_grid=grid)
print("semi distances:", np.round(rep.column("semi_dist"), 6))
print("hypotheses:", rep.hypotheses)
