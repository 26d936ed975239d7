"""Bounds on the consensus value of one random network, then a run that lands inside them."""
import numpy as np

from consensus_bounds import (GammaSpec, left_null_eigenvector, random_network, simulate,
                              solve_bounds)

rng = np.random.default_rng(7)

# 40 agents, preferential attachment with 2 links per newcomer, then 20% of
# the arcs made one-way (never breaking strong connectivity)
net = random_network(40, 2, 0.2, seed=rng)
print(f"{net.n} agents, {len(net.arcs)} arcs, neighbours per agent {net.neighbor_counts.min():.0f}"
      f"..{net.neighbor_counts.max():.0f}")

nu = left_null_eigenvector(net).nu
top = np.argsort(-nu)[:5]
print("most central agents:", ", ".join(f"{i} ({nu[i]:.3f})" for i in top))

x0 = rng.uniform(0.1, 0.9, net.n)
spec = GammaSpec(0.09, 0.25)          # gains x(1-x)/n_i, clamped to [0.09, 0.25]/n_i
res = solve_bounds(net, x0, spec, nu=nu)
print(f"\ninitial opinions span [{x0.min():.3f}, {x0.max():.3f}]")
print(f"consensus must land in [{res.alpha_min:.4f}, {res.alpha_max:.4f}] (width {res.gap:.4f})")

# the extremal gain vectors sit on corners of the box: slow agents below the
# bound, fast ones above it
glo, ghi = spec.bounds(net)
slow = np.isclose(res.gamma_star_low, glo)
print(f"lower bound: {slow.sum()} agents at their slowest gain, mean opinion "
      f"{x0[slow].mean():.3f} vs {x0[~slow].mean():.3f} for the rest")

rec = simulate(net, x0, spec, res.nu_under, res.nu_over)
print(f"\nsimulated consensus {rec.alpha:.4f} after {rec.steps} steps")
print(f"sign conditions held at {rec.flag_rates()[2]:.1%} of the steps")

# the weighted projections squeeze towards the consensus value
for k in (0, 10, 100, rec.steps // 2, rec.steps):
    print(f"  step {k:5d}: theta_under {rec.theta_under[k]:.5f}  theta_over {rec.theta_over[k]:.5f}"
          f"  spread {np.ptp(rec.states[k]):.2e}")
