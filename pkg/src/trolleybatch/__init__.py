"""Order batching for multi-block warehouses via a distance-approximation MILP."""

from .approx_model import ModelConfig, build, evaluate_batching, extract_batching, solve_exact
from .errors import TrolleyBatchError
from .heuristics import PioConfig, pio_batch, savings_batch
from .instance import (
    Batching,
    Instance,
    Order,
    Product,
    load_fixture,
    load_instance,
    parse_instance,
    random_instance,
)
from .milp import BackendConfig, MilpModel, solve, write_mps
from .router import NO_REVERSAL, REVERSAL, PickTask, Route, route_batching
from .warehouse import Location, SubaisleId, WarehouseLayout

__version__ = "0.1.0"
