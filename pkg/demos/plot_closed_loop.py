"""
Closed loop against a frozen baseline
=====================================

Eight iterations of present, decode, score and breed, compared with the
same protocol run on a frozen image set. Improvement percentages use the
raw trial-averaged amplitude and SNR.
"""

import numpy as np

from veploop import improvement_report, run_baseline, run_experiment

boosted = run_experiment(master_seed=0)
baseline = run_baseline(master_seed=0)

print("iteration  boosted_amp  baseline_amp")
for i, (a, b) in enumerate(zip(boosted.iteration_amplitude(), baseline.iteration_amplitude()), 1):
    print(f"{i:9d}  {a:11.1f}  {b:12.1f}")

print()
print(improvement_report(boosted, baseline).to_text())

###############################################################################
# The heatmap view holds one row per iteration and one column per trial.

heat = boosted.heatmap()
print("heatmap shape:", heat.shape)
print("row means:", np.round(heat.mean(axis=1), 3))
