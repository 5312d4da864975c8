"""
Non-iterative versus iterative campaigns
========================================

The iterative campaign seeds the K+1 search with the exact K+1 rewrite of the
K optimum, so its distance column can only go up.  Budgets here are small so
the script finishes in a few minutes; see full_budget.json for the full ones.
"""

# %%

import logging

from fourieropt import CampaignConfig, DeConfig, run_campaign

logging.basicConfig(level=logging.INFO, format="%(message)s")

de = DeConfig(population_size=30, max_generations=40, strategy="best1bin",
              stagnation_generations=0)
base = dict(k_min=2, k_max=4, trials=2, base_seed=1, de=de, improvement_threshold=None)

records = {mode: run_campaign(CampaignConfig(mode=mode, **base))
           for mode in ("noniterative", "iterative")}

# %%

for mode, rec in records.items():
    s = rec.summary()
    print(f"\n{mode}")
    for row in s["rows"]:
        delta = "" if row["delta"] != row["delta"] else f"{row['delta']:+.2f}%"
        print(f"  K={row['K']}: {row['mean']:.3f} +- {row['sd']:.3f} {delta}")
    print("  per-trial change:", s["delta_matrix"])
