"""
Optimal schedules with a transverse field in the target
=======================================================

With the target H_z + h H_x the critical point of the annealing path moves
to s_c = 1/(2 - h).  The regular optimal schedule flattens (ds/dm smallest)
right there.
"""

import numpy as np

from qaoa_ising import ChainSpec, regular_schedule
from qaoa_ising.experiments import flat_point

P = 64
for h in (0.0, 0.25, 0.5):
    ladder = regular_schedule(P, ChainSpec(4 * P, field=h), n_eval_per_p=4)
    s = ladder[-1].angles.schedule_values(h)
    m, s_flat = flat_point(s)
    print(f"h={h:4.2f}  flattest at m={m:3d}, s={s_flat:.4f}   1/(2-h)={1 / (2 - h):.4f}   "
          f"monotone={bool(np.all(np.diff(s) > 0))}")
