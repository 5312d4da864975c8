"""
Differential Evolution with a warm start
========================================
"""

# %%
# A plain benchmark first.

import numpy as np

from fourieropt import BoxBounds, DeConfig, optimize


def rastrigin(x):
    x = np.asarray(x)
    return float(10 * x.size + np.sum(x**2 - 10 * np.cos(2 * np.pi * x)))


box = BoxBounds(np.full(4, -5.12), np.full(4, 5.12))
for strategy in ("rand1bin", "best1bin"):
    res = optimize(rastrigin, box, DeConfig(population_size=40, max_generations=300, seed=0,
                                            strategy=strategy))
    print(f"{strategy}: f={res.best_cost:.3e} after {res.generations} generations "
          f"({res.stop_reason})")

# %%
# Seeding: whatever the budget, the result is never worse than the seed,
# because a member is only replaced by something at least as good.

seed = np.array([1.0, 0.0, 0.0, 1.0])
res = optimize(rastrigin, box, DeConfig(population_size=10, max_generations=2, seed=1),
               seed_members=[seed])
print(f"seed cost {rastrigin(seed):.3f} -> {res.best_cost:.3f}")
print("history:", np.round(res.cost_history, 3))
