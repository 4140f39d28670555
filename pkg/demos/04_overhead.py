"""
Time to build and solve the cover
=================================

Construction walks every flow path once; the lazy greedy pops a heap whose
entries are rescored only when stale. Both should scale with the number of
flows and barely notice the number of switches.
"""

from flowcover import experiments as ex

records = ex.run_overhead_experiment(
    n=200, m_values=(20000, 50000, 100000), n_values=(50, 200, 400), m_fixed=20000, repeats=2
)

print("sweep     n       m  construct   greedy")
for r in records:
    print(f"{r['sweep']:<8} {r['n']:>3} {r['m']:>7} {r['construct_s']:>9.3f}s {r['solve_s']:>7.3f}s")
