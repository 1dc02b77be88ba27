"""Run configuration: TOML ingestion and validation.

A run document has a [problem] table (particle and orbital counts, box,
nuclei, light speed or speed list), an optional [solver] table overriding
SolverConfig defaults, an optional [outputs] table, and an optional [run]
table (seed, multi_start). Validation errors always name the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .basis import PlaneWaveBasis
from .ci import CISpace
from .errors import ConfigError
from .meanfield import NuclearConfiguration
from .solver import SolverConfig

__all__ = ["ProblemConfig", "OutputConfig", "RunConfig", "load_run_config"]


@dataclass(frozen=True)
class ProblemConfig:
    n_particles: int
    n_orbitals: int
    box_length: float
    mode_bound: int
    charges: tuple
    positions: tuple
    smearing: float = 0.0
    c: Optional[float] = None
    c_values: Optional[tuple] = None
    warm_start: Optional[str] = None

    def basis(self, light_speed: Optional[float] = None) -> PlaneWaveBasis:
        speed = light_speed if light_speed is not None else self.c
        if speed is None:
            speed = self.c_values[0]
        return PlaneWaveBasis(box_length=self.box_length, mode_bound=self.mode_bound,
                              light_speed=float(speed))

    def space(self) -> CISpace:
        return CISpace(n_orbitals=self.n_orbitals, n_particles=self.n_particles)

    def nuclear(self) -> NuclearConfiguration:
        return NuclearConfiguration(charges=self.charges, positions=self.positions,
                                    smearing=self.smearing)


@dataclass(frozen=True)
class OutputConfig:
    out_dir: str = "."
    result_name: str = "result.json"
    sweep_name: str = "sweep.json"
    table_name: str = "sweep.csv"


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0
    multi_start: int = 1
    gamma_auto: bool = False

    def with_out_dir(self, out_dir: str) -> "RunConfig":
        return replace(self, outputs=replace(self.outputs, out_dir=out_dir))


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ConfigError(f"{where}.{key} is missing")
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key} must be {kind.__name__}, got {value!r}")
    return value


_PROBLEM_KEYS = {"n_particles", "n_orbitals", "box_length", "mode_bound",
                 "smearing", "nuclei", "c", "c_values", "warm_start"}


def _parse_problem(table: dict) -> ProblemConfig:
    where = "problem"
    extra = set(table) - _PROBLEM_KEYS
    if extra:
        raise ConfigError(f"problem.{sorted(extra)[0]} is not a recognized setting")
    n_particles = _require(table, "n_particles", int, where)
    n_orbitals = _require(table, "n_orbitals", int, where)
    if n_particles > n_orbitals:
        raise ConfigError(
            f"problem.n_orbitals: need at least n_particles = {n_particles}, "
            f"got {n_orbitals}"
        )
    box_length = _require(table, "box_length", float, where)
    mode_bound = _require(table, "mode_bound", int, where)
    smearing = float(table.get("smearing", 0.0))
    if smearing < 0:
        raise ConfigError(f"problem.smearing must be nonnegative, got {smearing}")

    nuclei = table.get("nuclei", [])
    if not isinstance(nuclei, list):
        raise ConfigError("problem.nuclei must be an array of tables")
    charges = []
    positions = []
    for i, entry in enumerate(nuclei):
        if not isinstance(entry, dict):
            raise ConfigError(f"problem.nuclei[{i}] must be a table")
        extra = set(entry) - {"charge", "position"}
        if extra:
            raise ConfigError(
                f"problem.nuclei[{i}].{sorted(extra)[0]} is not a recognized setting"
            )
        charges.append(_require(entry, "charge", float, f"problem.nuclei[{i}]"))
        pos = entry.get("position")
        if (not isinstance(pos, list) or len(pos) != 3
                or not all(isinstance(v, (int, float)) for v in pos)):
            raise ConfigError(f"problem.nuclei[{i}].position must be a 3-vector")
        positions.append(tuple(float(v) for v in pos))

    c = table.get("c")
    c_values = table.get("c_values")
    if c is None and c_values is None:
        raise ConfigError("problem.c or problem.c_values is required")
    if c is not None and c_values is not None:
        raise ConfigError("problem.c and problem.c_values are mutually exclusive")
    if c is not None:
        if not isinstance(c, (int, float)) or isinstance(c, bool) or c <= 0:
            raise ConfigError(f"problem.c must be a positive number, got {c!r}")
        c = float(c)
    if c_values is not None:
        if (not isinstance(c_values, list) or len(c_values) == 0
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in c_values)):
            raise ConfigError("problem.c_values must be a nonempty number array")
        c_values = tuple(float(v) for v in c_values)

    warm = table.get("warm_start")
    if warm is not None and not isinstance(warm, str):
        raise ConfigError(f"problem.warm_start must be a path string, got {warm!r}")

    return ProblemConfig(
        n_particles=n_particles, n_orbitals=n_orbitals, box_length=box_length,
        mode_bound=mode_bound, charges=tuple(charges), positions=tuple(positions),
        smearing=smearing, c=c, c_values=c_values, warm_start=warm,
    )


def _parse_solver(table: dict):
    known = {f.name: f.type for f in fields(SolverConfig)}
    kwargs = {}
    gamma_auto = False
    for key, value in table.items():
        if key == "gamma_floor" and value == "auto":
            gamma_auto = True
            continue
        if key not in known:
            raise ConfigError(f"solver.{key} is not a recognized setting")
        if isinstance(value, bool):
            if not isinstance(SolverConfig.__dataclass_fields__[key].default, bool):
                raise ConfigError(f"solver.{key} must not be a boolean")
        elif not isinstance(value, (int, float)):
            raise ConfigError(f"solver.{key} must be a number, got {value!r}")
        kwargs[key] = value
    try:
        cfg = SolverConfig(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"solver: {exc}") from None
    return cfg, gamma_auto


def _parse_outputs(table: dict) -> OutputConfig:
    out = OutputConfig()
    kwargs = {}
    for key in ("out_dir", "result_name", "sweep_name", "table_name"):
        if key in table:
            value = table[key]
            if not isinstance(value, str) or not value:
                raise ConfigError(f"outputs.{key} must be a nonempty string")
            kwargs[key] = value
    extra = set(table) - {"out_dir", "result_name", "sweep_name", "table_name"}
    if extra:
        raise ConfigError(f"outputs.{sorted(extra)[0]} is not a recognized setting")
    return replace(out, **kwargs)


def load_run_config(path) -> RunConfig:
    """Parse and validate a TOML run document."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {p}: {exc}") from None

    if "problem" not in doc or not isinstance(doc["problem"], dict):
        raise ConfigError("problem table is missing")
    problem = _parse_problem(doc["problem"])
    solver, gamma_auto = _parse_solver(doc.get("solver", {}))
    outputs = _parse_outputs(doc.get("outputs", {}))

    run_table = doc.get("run", {})
    seed = run_table.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"run.seed must be an integer, got {seed!r}")
    multi_start = run_table.get("multi_start", 1)
    if not isinstance(multi_start, int) or isinstance(multi_start, bool) or multi_start < 1:
        raise ConfigError(f"run.multi_start must be a positive integer, got {multi_start!r}")

    return RunConfig(problem=problem, solver=solver, outputs=outputs,
                     seed=seed, multi_start=multi_start, gamma_auto=gamma_auto)
