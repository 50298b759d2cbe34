"""
One generation of offspring
===========================

Besides the two parents (best amplitude, best SNR), a generation holds
eight mutants of the parents' average, one per noise level, plus ten
points interpolated between the parents.
"""

import numpy as np

from veploop.evolve import EvolveConfig, next_generation
from veploop.rng import StreamFactory

rng = np.random.default_rng(2)
z_fft, z_snr = rng.standard_normal(100), rng.standard_normal(100)
cfg = EvolveConfig()
offspring = next_generation(z_fft, z_snr, cfg, StreamFactory(0).child("generation", 1))

mid = 0.5 * (z_fft + z_snr)
print("generation size:", len(offspring))
for j, z in enumerate(offspring):
    kind = "elite" if j < 2 else "mutant" if j < 10 else "interp"
    print(f"{j:2d} {kind:6s} |z - mid|={np.linalg.norm(z - mid):6.2f}")
print("sigma ladder:", np.round(cfg.sigma_ladder(), 2))
