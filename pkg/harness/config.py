"""Run files: TOML in, a validated RunConfig out, and back again."""
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import tomlkit

from dynamics.state import SolverConfig
from fields.generators import Envelope
from inequality_lab.estimates import MAX_ORDER
from inequality_lab.interpolation import PRESETS
from spectral.core import THREADS_ENV, Grid, ParityClass
from utils import settings
from utils.exceptions import ConfigError, LabError

MODES = ("simulate", "linear", "inequalities", "sweep")
SIGMA_MIN = 3.0 / 23.0
# the heat kernel of a width-3 blob stays inside the core of this box for t ~ 10
DEFAULT_BOX_HALF_LENGTH = 12.0
DEFAULT_WIDTH = 0.25


@dataclass(frozen=True)
class InitialData:
    seed: int = 0
    amplitude: float = 1e-2
    b_scale: float = 1.0
    envelope: Envelope = field(default_factory=lambda: Envelope(width=DEFAULT_WIDTH))
    u_class: ParityClass = ParityClass.VELOCITY_LIKE
    b_class: ParityClass = ParityClass.MAGNETIC_LIKE


@dataclass(frozen=True)
class InequalitySettings:
    trials: int = 100
    poincare_orders: Tuple[int, ...] = (0, 1, 2)
    product_orders: Tuple[int, ...] = (0, 1, 2, 3, 4)
    commutator_orders: Tuple[int, ...] = (1, 2, 3, 4)
    presets: Tuple[str, ...] = ()

    @property
    def selected_presets(self) -> Tuple[str, ...]:
        return self.presets or tuple(sorted(PRESETS))


@dataclass(frozen=True)
class SweepSettings:
    amplitudes: Tuple[float, ...] = (1e-3, 1e-2, 1e-1)
    mode: str = "simulate"
    processes: int = 0

    @property
    def process_budget(self) -> int:
        if self.processes:
            return self.processes
        try:
            return max(1, int(os.environ.get(THREADS_ENV, "1")))
        except ValueError:
            return 1


@dataclass(frozen=True)
class RunConfig:
    mode: str = "simulate"
    grid: Grid = field(default_factory=lambda: Grid(box_half_length=DEFAULT_BOX_HALF_LENGTH))
    solver: SolverConfig = field(default_factory=SolverConfig)
    s: int = 2
    sigma: float = SIGMA_MIN
    initial: InitialData = field(default_factory=InitialData)
    inequalities: InequalitySettings = field(default_factory=InequalitySettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    output_directory: str = "runs"
    run_id: str = ""
    snapshots: bool = True
    # the file as given, echoed into the run record
    source_text: str = field(default="", compare=False, repr=False)

    def with_overrides(self, seed: Optional[int] = None, out: Optional[str] = None) -> "RunConfig":
        config = self
        if seed is not None:
            if seed < 0:
                raise ConfigError("invalid override", [f"--seed {seed} must be >= 0"])
            config = replace(config, initial=replace(config.initial, seed=seed))
        if out is not None:
            config = replace(config, output_directory=str(out))
        return config

    @property
    def name(self) -> str:
        return self.run_id or f"{self.mode}-seed{self.initial.seed}"

    def as_toml_dict(self) -> Dict[str, Any]:
        g, sv, ini, env = self.grid, self.solver, self.initial, self.initial.envelope
        return {
            "run": {"mode": self.mode},
            "grid": {
                "n": g.n,
                "box_half_length": g.box_half_length,
                "dealias_fraction": g.dealias_fraction,
                "window_core_fraction": g.window_core_fraction,
                "window_outer_fraction": g.window_outer_fraction,
            },
            "solver": {
                "dt": sv.dt,
                "t_end": sv.t_end,
                "cfl_safety": sv.cfl_safety,
                "parity_enforcement": sv.parity_enforcement,
                "sample_stride": sv.sample_stride,
                "leakage_abort_threshold": sv.leakage_abort_threshold,
                "blowup_factor": sv.blowup_factor,
            },
            "functionals": {"s": self.s, "sigma": self.sigma},
            "initial": {
                "seed": ini.seed,
                "amplitude": ini.amplitude,
                "b_scale": ini.b_scale,
                "width": env.width,
                "max_mode": env.max_mode,
                "decay": env.decay,
                "taper_start": env.taper_start,
                "u_class": ini.u_class.value,
                "b_class": ini.b_class.value,
            },
            "inequalities": {
                "trials": self.inequalities.trials,
                "poincare_orders": list(self.inequalities.poincare_orders),
                "product_orders": list(self.inequalities.product_orders),
                "commutator_orders": list(self.inequalities.commutator_orders),
                "presets": list(self.inequalities.presets),
            },
            "sweep": {
                "amplitudes": list(self.sweep.amplitudes),
                "mode": self.sweep.mode,
                "processes": self.sweep.processes,
            },
            "output": {"directory": self.output_directory, "run_id": self.run_id, "snapshots": self.snapshots},
        }


def _orders(values, name: str, lowest: int, highest: Optional[int], problems: List[str]) -> Tuple[int, ...]:
    orders = []
    for k in values:
        if not settings.is_int(k) or k < lowest or (highest is not None and k > highest):
            bound = f"[{lowest}, {highest}]" if highest is not None else f">= {lowest}"
            problems.append(f"{name}: order {k!r} must be an integer in {bound}")
        else:
            orders.append(k)
    return tuple(orders)


def _cross_checks(c: dict, problems: List[str]) -> None:
    lists = [
        ("inequalities", "poincare_orders"),
        ("inequalities", "product_orders"),
        ("inequalities", "commutator_orders"),
        ("inequalities", "presets"),
        ("sweep", "amplitudes"),
    ]
    for section, key in lists:
        if not isinstance(c[section][key], list):
            problems.append(f"{section}.{key}: expected a list, got {c[section][key]!r}")
    if problems:
        return
    n = c["grid"]["n"]
    if settings.is_int(n) and n & (n - 1):
        problems.append(f"grid.n: {n} is not a power of two")
    core, outer = c["grid"]["window_core_fraction"], c["grid"]["window_outer_fraction"]
    if isinstance(core, float) and isinstance(outer, float) and not core < outer:
        problems.append(
            f"grid.window_outer_fraction: {outer} must exceed grid.window_core_fraction ({core})"
        )
    sigma = c["functionals"]["sigma"]
    if isinstance(sigma, float) and not SIGMA_MIN <= sigma < 1:
        problems.append(f"functionals.sigma: {sigma} must lie in [3/23, 1)")
    if c["run"]["mode"] in ("simulate", "linear", "sweep"):
        if c["initial"]["u_class"] != ParityClass.VELOCITY_LIKE.value:
            problems.append("initial.u_class: an evolved u has to be velocity_like")
        if c["initial"]["b_class"] != ParityClass.MAGNETIC_LIKE.value:
            problems.append("initial.b_class: an evolved b has to be magnetic_like")
    for name in c["inequalities"]["presets"]:
        if not isinstance(name, str):
            problems.append(f"inequalities.presets: {name!r} is not a preset name")
        elif name not in PRESETS:
            problems.append(f"inequalities.presets: unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    for a in c["sweep"]["amplitudes"]:
        if isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 < a < math.inf:
            problems.append(f"sweep.amplitudes: {a!r} must be a positive number")


def _build(c: dict, source_text: str, problems: List[str]) -> Optional[RunConfig]:
    ineq = c["inequalities"]
    poincare = _orders(ineq["poincare_orders"], "inequalities.poincare_orders", 0, None, problems)
    prod = _orders(ineq["product_orders"], "inequalities.product_orders", 0, MAX_ORDER, problems)
    comm = _orders(ineq["commutator_orders"], "inequalities.commutator_orders", 1, MAX_ORDER, problems)
    parts = {}
    builders = {
        "grid": lambda: Grid(**c["grid"]),
        "solver": lambda: SolverConfig(**c["solver"], linear=c["run"]["mode"] == "linear"),
        "envelope": lambda: Envelope(
            c["initial"]["width"], c["initial"]["max_mode"], c["initial"]["decay"], c["initial"]["taper_start"]
        ),
    }
    for key, build in builders.items():
        try:
            parts[key] = build()
        except ConfigError as err:
            problems.extend(err.violations or [str(err)])
        except LabError as err:
            problems.append(f"{key}: {err}")
    if problems:
        return None
    ini = c["initial"]
    return RunConfig(
        mode=c["run"]["mode"],
        grid=parts["grid"],
        solver=parts["solver"],
        s=c["functionals"]["s"],
        sigma=c["functionals"]["sigma"],
        initial=InitialData(
            seed=ini["seed"],
            amplitude=ini["amplitude"],
            b_scale=ini["b_scale"],
            envelope=parts["envelope"],
            u_class=ParityClass(ini["u_class"]),
            b_class=ParityClass(ini["b_class"]),
        ),
        inequalities=InequalitySettings(ineq["trials"], poincare, prod, comm, tuple(ineq["presets"])),
        sweep=SweepSettings(
            tuple(float(a) for a in c["sweep"]["amplitudes"]), c["sweep"]["mode"], c["sweep"]["processes"]
        ),
        output_directory=c["output"]["directory"],
        run_id=c["output"]["run_id"],
        snapshots=c["output"]["snapshots"],
        source_text=source_text,
    )


def config_from_text(text: str, origin: str = "<config>") -> RunConfig:
    """Raises ConfigError listing every violation in the text."""
    validated = settings.validate_text(text, origin)
    problems: List[str] = []
    _cross_checks(validated, problems)
    config = None if problems else _build(validated, text, problems)
    if problems:
        raise ConfigError(f"{origin} has {len(problems)} invalid setting(s)", problems)
    return config


def parse_config(path) -> RunConfig:
    """Reads and validates a run file.

    Raises:
        ConfigError: listing every violated check.
        OSError: the file cannot be read.
    """
    path = Path(path)
    return config_from_text(path.read_text(encoding="utf-8"), str(path))


def serialize_config(config: RunConfig) -> str:
    return tomlkit.dumps(config.as_toml_dict())
