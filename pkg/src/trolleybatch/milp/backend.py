"""Run an external MIP solver on an MPS file and read its solution back."""

from __future__ import annotations

import glob
import importlib.util
import logging
import os
import platform
import re
import shlex
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass

from ..errors import SolverError
from .model import (
    ERROR,
    FEASIBLE,
    INFEASIBLE,
    INT_TOL,
    OPTIMAL,
    TIMEOUT,
    UNBOUNDED,
    MilpModel,
    SolveResult,
)
from .mps import sanitize, write_mps

logger = logging.getLogger(__name__)

TMPDIR_ENV = "TROLLEYBATCH_TMPDIR"
CBC_ENV = "TROLLEYBATCH_CBC"

CBC_TEMPLATE = "{binary} {model} {time_limit} -printingOptions all -solve -solu {solution}"


def find_cbc() -> str | None:
    """Locate a CBC executable: env override, PATH, then the copy bundled with PuLP."""
    path = os.environ.get(CBC_ENV)
    if path:
        return path
    path = shutil.which("cbc")
    if path:
        return path
    spec = importlib.util.find_spec("pulp")
    if spec and spec.origin:
        root = os.path.join(os.path.dirname(spec.origin), "solverdir", "cbc")
        arch = {"x86_64": ("i64", "64"), "amd64": ("i64", "64"), "aarch64": ("arm64",)}
        osdir = {"linux": "linux", "darwin": "osx", "win32": "win"}.get(sys.platform, "linux")
        for sub in arch.get(platform.machine().lower(), ()):
            for cand in glob.glob(os.path.join(root, osdir, sub, "cbc*")):
                if os.access(cand, os.X_OK):
                    return cand
    return None


@dataclass(frozen=True)
class BackendConfig:
    """How to call a solver.

    ``command`` is a template with ``{model}``, ``{solution}`` and optionally
    ``{time_limit}``, the latter expanded from ``time_limit_flag`` (which
    receives ``{seconds}``) or to nothing when no limit is set.
    """

    command: str
    parser: str = "cbc"
    time_limit: float | None = None
    time_limit_flag: str = "-sec {seconds}"
    tmpdir: str | None = None
    keep_files: bool = False

    @classmethod
    def cbc(cls, binary=None, time_limit=None, **kw) -> "BackendConfig":
        binary = binary or find_cbc()
        if binary is None:
            raise SolverError(
                f"no CBC executable found; install PuLP, put cbc on PATH or set {CBC_ENV}"
            )
        return cls(
            CBC_TEMPLATE.replace("{binary}", shlex.quote(binary)),
            parser="cbc",
            time_limit=time_limit,
            **kw,
        )

    def with_time_limit(self, seconds) -> "BackendConfig":
        return BackendConfig(
            self.command, self.parser, seconds, self.time_limit_flag, self.tmpdir, self.keep_files
        )

    def argv(self, model_path, solution_path) -> list[str]:
        limit = ""
        if self.time_limit is not None:
            limit = self.time_limit_flag.format(seconds=_fmt_seconds(self.time_limit))
        text = self.command.format(
            model=shlex.quote(model_path),
            solution=shlex.quote(solution_path),
            time_limit=limit,
        )
        return shlex.split(text)


def _fmt_seconds(s):
    return str(int(s)) if float(s).is_integer() else str(s)


# -- solution parsers -------------------------------------------------------


def _status_from_cbc(line: str):
    low = line.lower()
    has_incumbent = "no integer solution" not in low
    if low.startswith("optimal"):
        return OPTIMAL
    if low.startswith("infeasible") or low.startswith("integer infeasible"):
        return INFEASIBLE
    if low.startswith("unbounded"):
        return UNBOUNDED
    if low.startswith("stopped on time"):
        return TIMEOUT if not has_incumbent else "timeout_incumbent"
    if low.startswith("stopped"):
        return FEASIBLE if has_incumbent else ERROR
    return ERROR


def parse_cbc_solution(text: str):
    """CBC ``-solu`` output: a status line, then ``index name value [reduced cost]``."""
    lines = text.splitlines()
    if not lines:
        raise SolverError("empty solution file")
    status = _status_from_cbc(lines[0].strip())
    m = re.search(r"objective value\s+(\S+)", lines[0])
    obj = float(m.group(1)) if m else None
    values = {}
    for line in lines[1:]:
        parts = line.replace("**", " ").split()
        if len(parts) < 3:
            continue
        try:
            values[parts[1]] = float(parts[2])
        except ValueError:
            raise SolverError(f"unparsable solution line: {line!r}") from None
    return status, obj, values


def parse_name_value(text: str):
    """Generic ``name value`` or ``index name value`` lines; optional status header."""
    status, obj = OPTIMAL, None
    values = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            if parts and "infeasible" in line.lower():
                status = INFEASIBLE
            continue
        try:
            if len(parts) == 2:
                values[parts[0]] = float(parts[1])
            elif len(parts) >= 3 and parts[0].isdigit():
                values[parts[1]] = float(parts[2])
            else:
                raise ValueError
        except ValueError:
            status = _status_from_cbc(line.strip())
            m = re.search(r"objective value\s+(\S+)", line)
            obj = float(m.group(1)) if m else obj
    return status, obj, values


PARSERS = {"cbc": parse_cbc_solution, "name-value": parse_name_value}


def _log_metrics(log: str):
    root = best = nodes = None
    m = re.search(r"Continuous objective value is\s+(\S+)", log)
    if m:
        root = float(m.group(1))
    m = re.search(r"Cuts at root node changed objective from\s+\S+\s+to\s+(\S+)", log)
    if m and abs(float(m.group(1))) < 1e300:
        root = float(m.group(1))
    m = re.search(r"Enumerated nodes:\s+(\d+)", log)
    if m:
        nodes = int(m.group(1))
    m = re.search(r"Lower bound:\s+(\S+)", log)
    if m:
        try:
            best = float(m.group(1))
        except ValueError:
            pass
    return root, best, nodes


# -- solve ------------------------------------------------------------------


def solve(model: MilpModel, backend: BackendConfig) -> SolveResult:
    """Write ``model`` to a temporary MPS file, run the solver, map values back."""
    if backend.parser not in PARSERS:
        raise SolverError(f"unknown solution parser {backend.parser!r}")
    text = write_mps(model)
    back = {sanitize(n): n for n in model.variables}
    base = backend.tmpdir or os.environ.get(TMPDIR_ENV) or None
    workdir = tempfile.mkdtemp(prefix="tb-", dir=base)
    model_path = os.path.join(workdir, "model.mps")
    sol_path = os.path.join(workdir, "solution.txt")
    with open(model_path, "w") as fh:
        fh.write(text)
    argv = backend.argv(model_path, sol_path)
    guard = None if backend.time_limit is None else 2 * backend.time_limit + 30
    start = time.perf_counter()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=guard)
        log = proc.stdout + proc.stderr
        code = proc.returncode
    except subprocess.TimeoutExpired as exc:
        out = exc.stdout or ""
        log = out.decode(errors="replace") if isinstance(out, bytes) else out
        code = None
    except OSError as exc:
        _cleanup(workdir, backend)
        return SolveResult(ERROR, wall_time=time.perf_counter() - start, log=str(exc))
    wall = time.perf_counter() - start

    try:
        if not os.path.exists(sol_path):
            tail = "\n".join(log.splitlines()[-15:])
            what = "timed out" if code is None else f"exited with code {code}"
            return SolveResult(
                TIMEOUT if code is None else ERROR,
                wall_time=wall,
                log=f"solver {what} without a solution file\n{tail}",
            )
        with open(sol_path) as fh:
            status, reported, raw = PARSERS[backend.parser](fh.read())
    except SolverError as exc:
        return SolveResult(ERROR, wall_time=wall, log=f"{exc}\n{log}")
    finally:
        _cleanup(workdir, backend)

    root, lower, nodes = _log_metrics(log)
    result = SolveResult(status, wall_time=wall, log=log, root_bound=root, node_count=nodes)
    if status in (OPTIMAL, FEASIBLE, "timeout_incumbent"):
        values = {}
        for col, x in raw.items():
            name = back.get(col)
            if name is None:
                continue
            if model.variables[name].is_integer and abs(x - round(x)) <= INT_TOL:
                x = float(round(x))
            values[name] = x
        for name in model.variables:
            values.setdefault(name, 0.0)
        result.values = values
        result.objective_value = model.objective_value(values)
        if reported is not None and abs(result.objective_value - reported) > 1e-4 * (
            1 + abs(reported)
        ):
            logger.warning(
                "objective mismatch: solver reported %s, recomputed %s",
                reported,
                result.objective_value,
            )
        if status == "timeout_incumbent":
            result.status = TIMEOUT
        result.best_bound = result.objective_value if status == OPTIMAL else lower
    elif status == "timeout_incumbent":
        result.status = TIMEOUT
    return result


def solve_relaxation(model: MilpModel, backend: BackendConfig) -> SolveResult:
    return solve(model.relaxed(), backend)


def _cleanup(workdir, backend):
    if not backend.keep_files:
        shutil.rmtree(workdir, ignore_errors=True)


def require_solution(result: SolveResult, what="model") -> SolveResult:
    """Raise :class:`SolverError` unless ``result`` carries usable values."""
    if result.has_solution:
        return result
    raise SolverError(f"{what}: solver status {result.status}", result)
