"""Solver-agnostic linear model and solve result."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

INF = math.inf
INT_TOL = 1e-6

CONTINUOUS = "continuous"
BINARY = "binary"
INTEGER = "integer"
CATEGORIES = (CONTINUOUS, BINARY, INTEGER)

SENSES = ("<=", "=", ">=")
MAX_NAME = 64


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INF
    category: str = CONTINUOUS

    @property
    def is_integer(self) -> bool:
        return self.category != CONTINUOUS


@dataclass
class Constraint:
    name: str
    coeffs: dict
    sense: str
    rhs: float

    def activity(self, values) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.coeffs.items())

    def satisfied(self, values, tol=1e-6) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


class MilpModel:
    """A minimisation MILP built incrementally by name."""

    def __init__(self, name="model"):
        self.name = name
        self.variables: dict[str, Variable] = {}
        self.constraints: list[Constraint] = []
        self.objective: dict[str, float] = {}
        self._row_names: set[str] = set()

    def add_var(self, name, lower=0.0, upper=INF, category=CONTINUOUS) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name!r}")
        if len(name) > MAX_NAME:
            raise ValueError(f"variable name longer than {MAX_NAME}: {name!r}")
        if category not in CATEGORIES:
            raise ValueError(f"unknown category {category!r}")
        if category == BINARY:
            lower, upper = 0.0, 1.0
        if lower > upper:
            raise ValueError(f"{name}: lower {lower} > upper {upper}")
        self.variables[name] = Variable(name, float(lower), float(upper), category)
        return name

    def add_constraint(self, name, coeffs, sense, rhs) -> Constraint:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if name in self._row_names:
            raise ValueError(f"duplicate constraint {name!r}")
        if len(name) > MAX_NAME:
            raise ValueError(f"constraint name longer than {MAX_NAME}: {name!r}")
        merged = {}
        for v, c in coeffs.items() if isinstance(coeffs, dict) else coeffs:
            if v not in self.variables:
                raise KeyError(f"constraint {name!r} references undeclared {v!r}")
            merged[v] = merged.get(v, 0.0) + float(c)
        row = Constraint(name, {v: c for v, c in merged.items() if c != 0.0}, sense, float(rhs))
        self.constraints.append(row)
        self._row_names.add(name)
        return row

    def set_objective(self, coeffs):
        obj = {}
        for v, c in coeffs.items() if isinstance(coeffs, dict) else coeffs:
            if v not in self.variables:
                raise KeyError(f"objective references undeclared {v!r}")
            obj[v] = obj.get(v, 0.0) + float(c)
        self.objective = {v: c for v, c in obj.items() if c != 0.0}

    def objective_value(self, values) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.objective.items())

    def copy(self) -> "MilpModel":
        return copy.deepcopy(self)

    def relaxed(self) -> "MilpModel":
        """Copy with every integer or binary variable made continuous in its bounds."""
        out = self.copy()
        for var in out.variables.values():
            var.category = CONTINUOUS
        return out

    def violations(self, values, tol=1e-6) -> list[str]:
        """Names of violated rows and bounds; integrality checked for integer vars."""
        bad = [c.name for c in self.constraints if not c.satisfied(values, tol)]
        for var in self.variables.values():
            x = values.get(var.name, 0.0)
            if x < var.lower - tol or x > var.upper + tol:
                bad.append(f"bound:{var.name}")
            if var.is_integer and abs(x - round(x)) > tol:
                bad.append(f"integrality:{var.name}")
        return bad

    def __repr__(self):
        n_int = sum(v.is_integer for v in self.variables.values())
        return (
            f"MilpModel({self.name!r}, vars={len(self.variables)} ({n_int} integer), "
            f"rows={len(self.constraints)})"
        )


OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIMEOUT = "timeout"
ERROR = "error"


@dataclass
class SolveResult:
    status: str
    objective_value: float | None = None
    values: dict = field(default_factory=dict)
    best_bound: float | None = None
    root_bound: float | None = None
    node_count: int | None = None
    wall_time: float = 0.0
    log: str = ""

    @property
    def has_solution(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE) or (
            self.status == TIMEOUT and self.objective_value is not None
        )

    def value(self, name, default=0.0) -> float:
        return self.values.get(name, default)
