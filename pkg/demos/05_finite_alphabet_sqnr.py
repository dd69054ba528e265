"""
Finite alphabets at low rate
============================

At R bits/sample the codebook is cut down to 2**(R+1) levels, which are
then tuned by centroid iteration on training data.  SQNR is measured on
separate evaluation data.
"""

import numpy as np

from tcqlib import build_trellis, code_table
from tcqlib.codebook import init_alphabet, optimize_alphabet
from tcqlib.labeling import distance_preserving_labeling_z4
from tcqlib.sim import ExperimentConfig, draw_sources, run_sqnr_experiment

# one optimizer run by hand
tr = build_trellis(code_table("distance_optimal", 16))
lab = distance_preserving_labeling_z4()
train = draw_sources("iid-gaussian", 50, 1000, seed=3, stream=1)
ab, history = optimize_alphabet(train, tr, lab, init_alphabet(2, 1.0), return_history=True)
print("levels", np.round(ab.levels, 4))
print(f"{len(history)} passes, training MSE {history[0]:.5f} -> {history[-1]:.5f}")

# the preset used for the published comparison
base = ExperimentConfig(n_v=100, seed=1)
for source in ("uniform", "gaussian"):
    for fam in ("ungerboeck", "distance_optimal"):
        r = run_sqnr_experiment(1, 64, fam, source, base)
        print(f"{source:>8} R=1 64 states {fam:>16}: {r['metric']:.3f} ± {r['ci']:.4f} dB")
