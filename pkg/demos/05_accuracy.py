"""
Reading counters on a lossy network
===================================

Some switches drop packets after counting them, so a flow read downstream
of a loss point reports fewer bytes than it sent. We score a scheme by the
share of flows read back exactly (AFR) and by the aggregate byte error
(TM accuracy).
"""

from flowcover import experiments as ex

ratios = (0.0, 0.1, 0.3, 0.5)
records = ex.run_accuracy_experiment("er", 200, (20000,), (0.01,), ratios, seed=0)

print("loss switches   AFR     TM accuracy")
for r in records:
    print(f"{r['loss_ratio']:>12.0%}   {r['afr']:.3f}   {r['tm_accuracy']:.4f}")

# Raising the loss rate instead shows that TM accuracy degrades slowly: a
# flow that loses a few packets hurts AFR fully but the byte error barely.
for rate in (0.01, 0.05, 0.1):
    (r,) = ex.run_accuracy_experiment("er", 200, (20000,), (rate,), (0.1,), seed=0)
    print(f"loss rate {rate:.0%}: AFR {r['afr']:.3f}, TM accuracy {r['tm_accuracy']:.4f}")
