"""Spending a campaign budget on a 12-agent network.

Three agents can each be moved 20% of the way towards opinion 1.  Which three
raise the guaranteed lower bound the most?
"""
import numpy as np

from consensus_bounds import (ControlProblem, GammaSpec, allocate_baseline, allocate_bruteforce,
                              allocate_corollary1, evaluate_allocation, random_network)

rng = np.random.default_rng(3)
net = random_network(12, 2, 0.2, seed=rng)
spec = GammaSpec(0.03, 0.25, "uniform")

x0 = rng.uniform(0.1, 0.9, 12)
p = ControlProblem(net, x0, d=1, u_max=0.2, spec=spec, n_b=3)
plans = {
    "no campaign": None,
    "relaxed LP": allocate_corollary1(p),
    "relaxed LP, max-min": allocate_corollary1(p, formulation="maxmin"),
    "influence power": allocate_baseline(p),
    "all 220 subsets": allocate_bruteforce(p),
}
print(f"{'strategy':22s} funded        alpha_min")
for name, plan in plans.items():
    if plan is None:
        print(f"{name:22s} {'-':13s} {p.bound_after(np.zeros(12)):.4f}")
    else:
        print(f"{name:22s} {str(plan.funded.tolist()):13s} {plan.predicted_bound:.4f}")

# the bound is a guarantee: simulated runs of the funded network end above it
best = plans["all 220 subsets"]
rec = evaluate_allocation(p, best, trials=50, rng=rng)
print(f"\n50 simulated runs after the best campaign: consensus {rec.alphas.min():.4f}.."
      f"{rec.alphas.max():.4f}, bound {rec.alpha_min:.4f}, contained {rec.containment_rate:.0%}")

# averaged over many opinion draws
ratios = {k: [] for k in ("relaxed LP", "relaxed LP, max-min", "influence power")}
for _ in range(40):
    p = ControlProblem(net, rng.uniform(0.1, 0.9, 12), 1, 0.2, spec, n_b=3)
    best = allocate_bruteforce(p).predicted_bound
    ratios["relaxed LP"].append(allocate_corollary1(p).predicted_bound / best)
    ratios["relaxed LP, max-min"].append(
        allocate_corollary1(p, formulation="maxmin").predicted_bound / best)
    ratios["influence power"].append(allocate_baseline(p).predicted_bound / best)
print("\nshare of the best achievable bound, 40 draws:")
for k, v in ratios.items():
    print(f"  {k:20s} {np.mean(v):.3f} (worst {np.min(v):.3f})")
