"""
Residual energy versus annealing time
=====================================

Linear annealing through the Ising critical point leaves defects with the
Kibble-Zurek law eps ~ tau^(-1/2).  A Roland-Cerf schedule that slows down
where the gap closes does better, and the optimal digitized schedules reach
eps ~ 1/(a tau + b).
"""

import numpy as np

from qaoa_ising import (ChainSpec, bloch_evolve, digitized_evolve, linear_schedule, regular_schedule,
                        scaling_fit, schedule_duration, tune_roland_cerf)

chain = ChainSpec(1024)
taus = [8, 16, 32, 64, 128]

###############################################################################
# Continuous and step-wise linear annealing
# -----------------------------------------
lin = [(t, bloch_evolve(linear_schedule(t), chain).eps_res) for t in taus]
dig = [(t, digitized_evolve(linear_schedule(t), chain, dt_m=1.0).eps_res) for t in taus]
print("linear QA slope  ", scaling_fit(lin).exponent)
print("linear dQA slope ", scaling_fit(dig).exponent)

###############################################################################
# Roland-Cerf with a tuned gap floor
# ----------------------------------
rc = []
for t in taus:
    g, rep = tune_roland_cerf(t, chain)
    rc.append((t, rep.eps_res))
    print(f"tau={t:4d}  gap floor {g:.3f}  eps {rep.eps_res:.3e}")
print("Roland-Cerf slope", scaling_fit(rc).exponent)

###############################################################################
# Optimal digitized schedules
# ---------------------------
opt = [(schedule_duration(r.angles), r.eps_res) for r in regular_schedule(64, chain)]
fit = scaling_fit(opt)
print(f"optimal: 1/eps = {fit.inv_a:.3f} tau + {fit.inv_b:.3f}  (r^2 = {fit.inv_r_squared:.6f})")
print(np.array(opt))
