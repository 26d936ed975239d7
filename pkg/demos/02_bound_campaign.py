"""A few hundred random networks: how tight are the bounds, and how often do they hold?

The same campaign is available as ``python -m consensus_bounds scenario1``.
"""
import numpy as np

from consensus_bounds import preset, run_bounds_scenario

for name in ("scenario1", "scenario2", "scenario3"):
    cfg = preset(name, trials=200, seed=1)
    stats = run_bounds_scenario(cfg)
    s = stats.summary
    gap = stats.column("gap")
    lower = stats.column("lower_margin")
    upper = stats.column("upper_margin")
    print(f"{name}: x0 {cfg.x0_dist}, gains {cfg.gamma_model}")
    print(f"  mean bound width {s['mean_gap']:.3f} (quartiles {np.percentile(gap, 25):.3f}, "
          f"{np.percentile(gap, 75):.3f}); max-min of x0 {s['mean_conservative_gap']:.3f}")
    print(f"  consensus inside the bounds on {s['containment_rate']:.1%} of runs; "
          f"tightest margins {lower.min():.4f} below, {upper.min():.4f} above")
    print(f"  sign conditions at every step: {s['rate_both']:.1%} of runs "
          f"({s['step_rate_both']:.1%} of individual steps)\n")

# a crude text histogram of where the consensus falls inside its interval
stats = run_bounds_scenario(preset("scenario1", trials=200, seed=1))
pos = stats.column("lower_margin") / stats.column("gap")
counts, edges = np.histogram(pos, bins=10, range=(0, 1))
print("relative position of the consensus inside [alpha_min, alpha_max] (# = 2 runs):")
for c, e in zip(counts, edges):
    print(f"  {e:.1f}-{e + 0.1:.1f} {'#' * (c // 2)}")
