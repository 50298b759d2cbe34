"""
Picking a diverse starting set
==============================

Fifty random latents are rendered, described by five image features, and
the five most mutually distant images (after z-scoring each feature) are
kept for the first iteration.
"""

import numpy as np

from veploop import stimgen
from veploop.imfeat import diversity_score, precheck_features, select_diverse

gcfg = stimgen.GeneratorConfig()
rng = np.random.default_rng(1)
images = [stimgen.render_latent(stimgen.sample_latent(rng, gcfg.d), gcfg)[1] for _ in range(50)]
feats = [precheck_features(img) for img in images]

chosen = select_diverse(feats, 5, mode="exhaustive")
greedy = select_diverse(feats, 5, mode="greedy")
random = rng.choice(50, 5, replace=False)

print("exhaustive pick:", chosen.tolist(), f"score={diversity_score(feats, chosen):.2f}")
print("greedy pick:    ", greedy.tolist(), f"score={diversity_score(feats, greedy):.2f}")
print("random pick:    ", sorted(random.tolist()), f"score={diversity_score(feats, random):.2f}")

for i in chosen:
    f = feats[i]
    print(f"  image {i:2d}: std={f.pixel_std:.3f} edges={f.edge_count:4d} "
          f"haar={f.haar_hf_energy:7.1f} freq={f.mean_fourier_freq:.3f} skew={f.hist_skewness:+.2f}")
