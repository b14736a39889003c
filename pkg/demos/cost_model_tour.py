"""
Latency/energy cost model tour
==============================

Walks the deterministic cost model: what full local processing costs, how
the offloading actions trade uplink time against saved tail computation,
and where each action becomes deadline-feasible as the channel improves.
"""

import numpy as np

from offloadlab import Action, SystemParams, energy_local, latency_local, total_cost

params = SystemParams()
print("pipelines:", params.n_pipelines, "  deadline:", params.l_th_ms, "ms")
print()

# the three supported actions: keep everything local, keep two pipelines,
# keep one pipeline
actions = [Action(i) for i in (0, 2, 3)]

print("local-only view (no channel involved)")
for a in actions:
    print(f"  {a.name}: latency {latency_local(params, a):7.2f} ms"
          f"   energy {energy_local(params, a):.4f} J")
print()

# now add the communication branch at a decent channel and a calm queue
phi = 10.0   # Mbit/s, both directions
q = 15.0     # ms of server queueing

print(f"costs at phi={phi} Mbit/s, q={q} ms")
for a in actions:
    cb = total_cost(params, a, phi, phi, q)
    flag = "ok" if cb.l_total_ms <= params.l_th_ms else "MISSES DEADLINE"
    print(f"  {a.name}: total {cb.l_total_ms:7.2f} ms"
          f"   energy {cb.e_total_j:.4f} J   {flag}")
print()

# sweep the uplink and watch the feasibility frontier move.  offload_3 ships
# the most data so it needs the fastest channel to beat the deadline.
print("uplink sweep (q=15 ms): which actions meet the deadline?")
print("phi_mbps  " + "  ".join(a.name for a in actions))
for phi in np.arange(2.0, 12.5, 1.0):
    row = []
    for a in actions:
        cb = total_cost(params, a, float(phi), float(phi), q)
        row.append(" yes " if cb.l_total_ms <= params.l_th_ms else "  no ")
    print(f"  {phi:5.1f}   " + "   ".join(row))
