"""Command-line front end.

    trolleybatch batch --instance inst.json --method exact --mode noreversal
    trolleybatch oracle --instance inst.json
    trolleybatch generate --seed 3 --out tiny.json

Reports go to ``--out`` (stdout by default) as JSON or one-row CSV.  Errors
are written to stderr as a JSON object and map to fixed exit codes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

from . import approx_model, heuristics, oracle, router
from .approx_model import ModelConfig
from .errors import (
    InfeasibleInstanceError,
    InstanceValidationError,
    OracleLimitError,
    TrolleyBatchError,
)
from .instance import load_instance, random_instance, serialize_instance
from .milp import TIMEOUT, BackendConfig, solve_relaxation

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_TIMEOUT = 4
EXIT_ORACLE_LIMIT = 5

MODE_FLAGS = {"noreversal": router.NO_REVERSAL, "reversal": router.REVERSAL}


def deviation(value, reference):
    """Percentage deviation of ``value`` from ``reference``."""
    if reference is None or value is None:
        return None
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return 100.0 * (value - reference) / reference


def _display(x):
    return None if x is None else f"{x:.1f}"


@dataclass
class RunReport:
    method: str
    config: dict
    status: str = "ok"
    build_time: float | None = None
    solve_time: float | None = None
    route_time: float | None = None
    objective: float | None = None
    root_bound: float | None = None
    lp_bound: float | None = None
    node_count: int | None = None
    batching: dict = field(default_factory=dict)
    routes: list = field(default_factory=list)
    routed_total: dict = field(default_factory=dict)
    reference: float | None = None
    deviation_pct: float | None = None
    rounds: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["objective_display"] = _display(self.objective)
        d["routed_total_display"] = {k: _display(v) for k, v in self.routed_total.items()}
        return d


def flatten(doc: dict, prefix="") -> dict:
    """Dotted keys for nested dicts; lists are kept whole (JSON in CSV cells)."""
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def to_csv(doc: dict) -> str:
    flat = flatten(doc)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(flat)
    writer.writerow(
        ["" if v is None else json.dumps(v) if isinstance(v, list) else repr(v) if isinstance(v, float) else v
         for v in flat.values()]
    )
    return buf.getvalue()


def emit(doc: dict, out: str | None, fmt: str):
    text = to_csv(doc) if fmt == "csv" else json.dumps(doc, indent=2) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# -- backend and model flags ----------------------------------------------------


def backend_from_args(args) -> BackendConfig:
    fields = {}
    if getattr(args, "solver_config", None):
        with open(args.solver_config) as fh:
            fields = json.load(fh)
    if args.solver_cmd:
        fields["command"] = args.solver_cmd
    if args.solver_parser:
        fields["parser"] = args.solver_parser
    if "command" in fields:
        backend = BackendConfig(**fields)
    else:
        backend = BackendConfig.cbc(**{k: v for k, v in fields.items() if k != "parser"})
    if args.time_limit is not None:
        backend = backend.with_time_limit(args.time_limit)
    return backend


def model_config_from_args(args) -> ModelConfig:
    return ModelConfig(
        multiblock_extension=not args.no_multiblock,
        parity_terms=not args.no_parity,
        symmetry=args.symmetry,
        valid_inequalities=not args.no_cuts,
    )


# -- commands -----------------------------------------------------------------------


def cmd_batch(args) -> RunReport:
    instance = load_instance(args.instance)
    mode = MODE_FLAGS[args.mode]
    cfg = model_config_from_args(args)
    backend = backend_from_args(args)
    report = RunReport(
        args.method,
        {
            "instance": args.instance,
            "mode": args.mode,
            "tau": args.tau,
            "estimator": args.estimator,
            "model": asdict(cfg),
            "solver_cmd": backend.command,
            "time_limit": args.time_limit,
        },
        reference=args.reference,
    )
    start = time.perf_counter()
    if args.method == "exact":
        sol = approx_model.solve_exact(instance, cfg, backend)
        batching = sol.batching
        report.build_time = sol.build_time
        report.objective = sol.objective
        report.root_bound = sol.result.root_bound
        report.node_count = sol.result.node_count
        report.status = sol.result.status
        lp = solve_relaxation(sol.model, backend)
        report.lp_bound = lp.objective_value if lp.has_solution else None
    elif args.method == "pio":
        run = heuristics.pio_run(
            instance, heuristics.PioConfig(backend, args.tau, cfg, args.time_limit)
        )
        batching = run.batching
        report.rounds = run.rounds
    else:
        batching = heuristics.savings_batch(instance, mode, args.estimator, backend, cfg)
    report.solve_time = time.perf_counter() - start
    if args.method != "exact":
        report.objective = approx_model.evaluate_batching(instance, batching, backend, cfg)
    report.batching = {oid: batching.assignment[oid] for oid in sorted(batching.assignment)}

    start = time.perf_counter()
    routes, total = router.route_batching(instance, batching, mode, backend)
    report.route_time = time.perf_counter() - start
    report.routes = [r.to_dict(t) for t, r in routes.items()]
    report.routed_total = {args.mode: total}
    report.deviation_pct = deviation(total, args.reference)
    return report


def cmd_oracle(args) -> dict:
    instance = load_instance(args.instance)
    limits = oracle.OracleLimits()
    cfg = ModelConfig()
    approx, best = oracle.approx_optimum(instance, cfg, limits)
    out = {
        "instance": args.instance,
        "approx_optimum": approx,
        "approx_batching": best.assignment,
    }
    for flag, mode in MODE_FLAGS.items():
        value, batching = oracle.joint_optimal(instance, mode, limits)
        out[f"joint_{flag}"] = value
        out[f"joint_{flag}_batching"] = batching.assignment
    return out


def cmd_generate(args) -> str:
    inst = random_instance(
        args.seed,
        num_orders=args.orders,
        num_trolleys=args.trolleys,
        capacity=args.capacity,
        num_aisles=args.aisles,
        num_blocks=args.blocks,
    )
    return serialize_instance(inst)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trolleybatch", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("batch", help="batch orders, route trolleys, report")
    b.add_argument("--instance", required=True)
    b.add_argument("--method", choices=("exact", "pio", "savings"), default="exact")
    b.add_argument("--tau", type=int, default=1)
    b.add_argument("--mode", choices=tuple(MODE_FLAGS), default="noreversal")
    b.add_argument("--estimator", choices=heuristics.ESTIMATORS, default=heuristics.EXACT_ROUTE)
    b.add_argument("--solver-cmd", help="template with {model}, {solution}, {time_limit}")
    b.add_argument("--solver-parser", choices=("cbc", "name-value"))
    b.add_argument("--solver-config", help="JSON file with BackendConfig fields")
    b.add_argument("--time-limit", type=float)
    b.add_argument("--no-multiblock", action="store_true")
    b.add_argument("--no-parity", action="store_true")
    b.add_argument("--symmetry", choices=("none", "basic", "strong"), default="strong")
    b.add_argument("--no-cuts", action="store_true")
    b.add_argument("--reference", type=float)
    b.add_argument("--out")
    b.add_argument("--format", choices=("json", "csv"), default="json")

    o = sub.add_parser("oracle", help="brute-force optima of a tiny instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--out")
    o.add_argument("--format", choices=("json", "csv"), default="json")

    g = sub.add_parser("generate", help="write a seeded random tiny instance")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--orders", type=int, default=4)
    g.add_argument("--trolleys", type=int, default=2)
    g.add_argument("--capacity", type=int, default=3)
    g.add_argument("--aisles", type=int, default=3)
    g.add_argument("--blocks", type=int, default=2)
    g.add_argument("--out")
    return p


def _exit_code(exc) -> int:
    if isinstance(exc, OracleLimitError):
        return EXIT_ORACLE_LIMIT
    if isinstance(exc, (InstanceValidationError, InfeasibleInstanceError, OSError)):
        return EXIT_VALIDATION
    result = getattr(exc, "result", None)
    if result is not None and result.status == TIMEOUT and not result.has_solution:
        return EXIT_TIMEOUT
    return EXIT_SOLVER


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "batch":
            doc = cmd_batch(args).to_dict()
        elif args.command == "oracle":
            doc = cmd_oracle(args)
        else:
            text = cmd_generate(args)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        emit(doc, args.out, args.format)
    except (TrolleyBatchError, OSError) as exc:
        code = _exit_code(exc)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, InstanceValidationError):
            err["path"] = exc.path
            err["constraint"] = exc.constraint
        sys.stderr.write(json.dumps(err) + "\n")
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
