"""
How much does set-cover polling save?
=====================================

Random 200-switch networks carry between a thousand and a hundred thousand
flows on shortest paths. For each, the greedy scheme is compared with
polling every flow individually.
"""

import numpy as np

from flowcover import experiments as ex

m_values = (1000, 20000, 100000)

for kind in ("er", "waxman"):
    rows = [ex.run_cost_experiment(kind, 200, m_values, seed=s) for s in range(3)]
    print(f"{kind} topology")
    for i, m in enumerate(m_values):
        saving = np.mean([r[i]["savings"] for r in rows])
        cost = rows[0][i]["flowcover_cost"]
        base = rows[0][i]["baseline_cost"]
        print(f"  m={m:>6}: {cost:>11,} vs {base:>11,} bytes (seed 0), mean savings {saving:.1%}")

# Savings hover just under half: most flows ride through a handful of busy
# core switches, and each flow read from a poll-all reply costs 96 bytes
# instead of 296.
