"""
PIO against the full model
==========================

Generate a small random instance and batch it three ways.  PIO with tau equal
to the trolley count solves the full model in one round.
"""

import time

from trolleybatch import random_instance
from trolleybatch.approx_model import ModelConfig, evaluate_batching, solve_exact
from trolleybatch.heuristics import PioConfig, pio_run, savings_batch
from trolleybatch.milp import BackendConfig

backend = BackendConfig.cbc()
inst = random_instance(7, num_orders=8, num_trolleys=3, capacity=4, num_aisles=5, num_blocks=2)

t0 = time.perf_counter()
exact = solve_exact(inst, ModelConfig(), backend)
print(f"exact      {exact.objective:6.1f}  {time.perf_counter() - t0:.2f}s")

for tau in (1, 2, inst.num_trolleys):
    t0 = time.perf_counter()
    run = pio_run(inst, PioConfig(backend, tau=tau))
    value = evaluate_batching(inst, run.batching, backend)
    print(f"pio tau={tau}  {value:6.1f}  {time.perf_counter() - t0:.2f}s  rounds={len(run.rounds)}")

# savings merges with exact routes as its cost estimate
t0 = time.perf_counter()
b = savings_batch(inst, backend=backend)
print(f"savings    {evaluate_batching(inst, b, backend):6.1f}  {time.perf_counter() - t0:.2f}s")
print(b.assignment)
