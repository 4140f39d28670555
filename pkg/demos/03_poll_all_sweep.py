"""
Too few or too many poll-all switches
=====================================

Start with no poll-all switches and add them one at a time, always taking
the switch that covers the most flows not yet covered. Every flow left over
gets its own single poll.
"""

import numpy as np

from flowcover import experiments as ex

records = ex.run_poll_all_sweep(n=100, m=20000, seed=0)
costs = np.array([r["total_cost"] for r in records])
k_best = int(costs.argmin())

for k in (0, 5, 10, 20, k_best, 50, 75, 100):
    bar = "#" * int(60 * costs[k] / costs.max())
    print(f"k={k:>3} {costs[k]:>10,} {bar}")

# The first few switches sweep up thousands of flows each, so the cost
# falls steeply. Past the minimum every new switch mostly returns entries we
# already have, and the cost creeps back up.
print(f"minimum {costs[k_best]:,} bytes at k={k_best}, baseline {costs[0]:,}")
