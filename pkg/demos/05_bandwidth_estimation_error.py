"""What mis-estimating the radars' working bandwidth costs.

The optimiser plans against per-radar bandwidth estimates drawn once per run;
the final schedules are then scored against the true bands. Under-estimates
leave part of the hop band clear and the radar eventually gets an
unsuppressed look; over-estimates dilute jamming power over dead spectrum.
"""

import numpy as np

from farjam import default_scenario
from farjam.experiments import DESK, run_error_trial, variant_config

scenario = default_scenario()
cfg = variant_config("PROPOSED", DESK)
trials, frames = 5, 2

baseline = None
for sigma in (0.0, 0.1, 0.3, 0.5):
    scored = []
    for i in range(trials):
        _, believed, per_frame = run_error_trial(scenario, frames, 100 + i, cfg, sigma)
        scored.append(np.mean(per_frame))
    mean = float(np.mean(scored))
    if sigma == 0.0:
        baseline = mean
        print(f"sigma=0%:  scored utility {mean:.4f} (baseline)")
    else:
        decline = 100 * (1 - mean / baseline)
        print(f"sigma={sigma:.0%}: scored utility {mean:.4f}  decline {decline:.1f}%")
