"""
Channel and queue model behavior
================================

Samples the two sources of randomness the simulator exposes to a policy:
Rayleigh-distributed link capacity and a truncated-geometric server queue.
Shows that the capacity fit recovers the generating parameter and that the
queue's mean delay explodes as utilization approaches one.
"""

import numpy as np

from offloadlab import (
    ChannelModel,
    QueueModel,
    fit_rayleigh,
    mean_delay_ms,
    queue_pmf,
    sample_capacities,
    sample_delays,
)

rng = np.random.default_rng(42)

# --- capacity ---------------------------------------------------------------
true = ChannelModel(sigma=8.0)
xs = sample_capacities(true, rng, 50_000)
fit = fit_rayleigh(xs)
print(f"capacity: true sigma {true.sigma}, fitted {fit.sigma:.4f}")
print(f"  sample mean {xs.mean():.3f} Mbit/s vs model mean {true.mean_mbps:.3f}")
print(f"  5th/95th percentile: {np.percentile(xs, 5):.2f} / {np.percentile(xs, 95):.2f}")
print()

# --- queue ------------------------------------------------------------------
# rho is the utilization; the position distribution is geometric, truncated
# at the queue capacity and renormalized
for rho in (0.5, 0.9, 0.97, 0.99):
    model = QueueModel(rho=rho)
    pmf = queue_pmf(model.rho, model.cap)
    ds = sample_delays(model, rng, 50_000)
    print(f"rho={rho}: mean delay {mean_delay_ms(model):8.2f} ms"
          f"   sampled {ds.mean():8.2f} ms"
          f"   P(empty) {pmf[0]:.3f}")

print()
print("a near-saturated queue is what makes blind offloading risky:")
busy = QueueModel(rho=0.99)
ds = sample_delays(busy, rng, 50_000)
print(f"  at rho=0.99, {100.0 * (ds > 68.12).mean():.1f}% of delays alone"
      " already exceed the 68.12 ms frame deadline")
