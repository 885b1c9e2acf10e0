"""
The grid worked example
=======================

A single trolley on a 4x4 grid picking two products.  The approximation model and
the exact router should both give a distance of 6.
"""

from trolleybatch import ModelConfig, build, load_fixture, solve
from trolleybatch.milp import BackendConfig
from trolleybatch.router import PickTask, route_no_reversal

inst = load_fixture("worked_example.json")
backend = BackendConfig.cbc()
print(inst.layout.num_aisles, "aisles x", inst.layout.num_blocks, "blocks")

# approximation model: one row of x/y/w per trolley
model, cat = build(inst, ModelConfig())
res = solve(model, backend)
print("approximate distance", res.objective_value)

# route the same products without reversing inside a subaisle
route = route_no_reversal(PickTask(inst.layout, inst.products), backend)
print("walk", route.walk)
print("routed distance", route.distance)
