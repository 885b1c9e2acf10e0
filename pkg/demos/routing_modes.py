"""
Routing with and without reversal
=================================

Once a trolley's orders are fixed it can be routed two ways.  Without
reversal each visited subaisle is walked end to end; with reversal the
picker may turn around at a product.
"""

import numpy as np

from trolleybatch import random_instance
from trolleybatch.approx_model import ModelConfig, solve_exact
from trolleybatch.milp import BackendConfig
from trolleybatch.router import NO_REVERSAL, REVERSAL, route_batching

backend = BackendConfig.cbc()
inst = random_instance(3, num_orders=6, num_trolleys=2, capacity=4, num_aisles=4, num_blocks=2)
batching = solve_exact(inst, ModelConfig(), backend).batching

totals = {}
for mode in (NO_REVERSAL, REVERSAL):
    routes, totals[mode] = route_batching(inst, batching, mode, backend)
    for t, r in routes.items():
        print(mode, "trolley", t, round(r.distance, 3), "steps", len(r.walk) - 1)

# reversal can only shorten a walk
print(totals)
gap = np.subtract(totals[NO_REVERSAL], totals[REVERSAL])
print("saved by reversing:", round(float(gap), 3))
