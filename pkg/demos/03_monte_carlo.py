"""
A small Monte Carlo study
=========================

``run_study`` repeats the estimation on independent panels and reports
pointwise bias and RMSE against the known truth. Replication ``r`` only
depends on ``(seed, r)``, so a run is reproducible whatever the number of
worker processes. A few replications at two sample sizes already show
the error shrinking.
"""

import time

import dyadreg as dr

for N in (40, 80):
    cfg = dr.StudyConfig(N=N, replications=4, grid_points=25, seed=11)
    t0 = time.perf_counter()
    res = dr.run_study(cfg)
    print(f"N = {N:3d} ({time.perf_counter() - t0:.1f} s)")
    for name, label in (("g_x", "g(x, 5, -6)"), ("nw_x", "NW on same slice"),
                        ("g_e", "g(4, 5, e)"), ("fe", "F_e(e)")):
        print(f"  {label:17s} grid RMSE {res.grid_rmse(name):.4f}   "
              f"sup |bias| {res.sup_abs_bias(name):.4f}")

# %%
# The same study from the command line writes fig1..fig3, a summary and a
# manifest that can be fed back as the config of an identical rerun:
#
#     dyadreg simulate --config study.json --out run1 --seed 11
