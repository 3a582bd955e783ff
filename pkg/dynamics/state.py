from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from fields.parity import parity_error
from spectral.core import Grid, ParityClass, VectorField, divergence
from utils.exceptions import ConfigError, PreconditionError

STATE_TOL = 1e-10


def relative_divergence(v: VectorField) -> float:
    total = np.sqrt(np.sum(v.grid.k_squared * np.abs(v.coefficients) ** 2))
    if total == 0:
        return 0.0
    return float(np.sqrt(np.sum(np.abs(divergence(v).coefficients) ** 2)) / total)


@dataclass(frozen=True, eq=False)
class State:
    """Velocity perturbation u (velocity_like), magnetic perturbation b (magnetic_like), time t."""

    u: VectorField
    b: VectorField
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "State":
        return cls(
            VectorField.zeros(grid, ParityClass.VELOCITY_LIKE),
            VectorField.zeros(grid, ParityClass.MAGNETIC_LIKE),
            t,
        )

    def at(self, t: float) -> "State":
        return replace(self, t=t)

    def validate(self, tol: float = STATE_TOL) -> "State":
        """Checks the class and divergence tags against the data.

        Raises:
            PreconditionError: listing every failed check.
        """
        problems = []
        if self.u.grid != self.b.grid:
            raise ConfigError("u and b live on different grids")
        for name, v, expected in (
            ("u", self.u, ParityClass.VELOCITY_LIKE),
            ("b", self.b, ParityClass.MAGNETIC_LIKE),
        ):
            err = parity_error(v, expected)
            if err > tol:
                problems.append(f"{name} is not {expected.value} (parity error {err:.3e})")
            div = relative_divergence(v)
            if div > tol:
                problems.append(f"{name} is not divergence-free (relative divergence {div:.3e})")
        if problems:
            raise PreconditionError("invalid state: " + "; ".join(problems))
        return self


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping controls.

    Args:
        dt                      : step size.
        t_end                   : final time.
        cfl_safety              : fraction of the advective CFL bound dt may use.
        parity_enforcement      : project onto the symmetry classes after every step.
        sample_stride           : steps between recorded samples.
        leakage_abort_threshold : abort when a field leaks this much mass out of the core.
        linear                  : drop the quadratic terms F and G.
        background_coupling     : keep the d_theta coupling to the background field.
        blowup_factor           : abort when ||u||_{H^2} exceeds this multiple of its initial value.
    """

    dt: float = 1e-3
    t_end: float = 1.0
    cfl_safety: float = 0.8
    parity_enforcement: bool = True
    sample_stride: int = 10
    leakage_abort_threshold: float = 1e-4
    linear: bool = False
    background_coupling: bool = True
    blowup_factor: float = 1e3

    def __post_init__(self):
        problems = []
        if not 0 < self.dt < np.inf:
            problems.append(f"dt={self.dt} must be finite and > 0")
        if not 0 <= self.t_end < np.inf:
            problems.append(f"t_end={self.t_end} must be finite and >= 0")
        if not 0 < self.cfl_safety <= 1:
            problems.append(f"cfl_safety={self.cfl_safety} must lie in (0, 1]")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            problems.append(f"sample_stride={self.sample_stride} must be an integer >= 1")
        if not self.leakage_abort_threshold > 0:
            problems.append(f"leakage_abort_threshold={self.leakage_abort_threshold} must be > 0")
        if not self.blowup_factor > 1:
            problems.append(f"blowup_factor={self.blowup_factor} must be > 1")
        if problems:
            raise ConfigError("invalid solver settings", problems)


@dataclass
class Trajectory:
    """Sampled states with right-hand sides evaluated at the sample times.

    integrals["dissipation"][i] holds int_0^{t_i} ||grad u||^2 accumulated every step.
    """

    samples: List[State] = field(default_factory=list)
    derived: List[Tuple[VectorField, VectorField]] = field(default_factory=list)
    integrals: Dict[str, List[float]] = field(default_factory=lambda: {"dissipation": []})
    leakage: List[float] = field(default_factory=list)
    parity_drift: List[Tuple[float, float]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def append(
        self,
        state: State,
        derived: Tuple[VectorField, VectorField],
        dissipation: float = 0.0,
        leakage: float = 0.0,
        parity_drift: Tuple[float, float] = (0.0, 0.0),
    ) -> None:
        if self.samples and not state.t > self.samples[-1].t:
            raise PreconditionError(
                f"sample time {state.t} does not follow {self.samples[-1].t}"
            )
        self.samples.append(state)
        self.derived.append(derived)
        self.integrals.setdefault("dissipation", []).append(float(dissipation))
        self.leakage.append(float(leakage))
        self.parity_drift.append((float(parity_drift[0]), float(parity_drift[1])))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def grid(self) -> Optional[Grid]:
        return self.samples[0].grid if self.samples else None

    @property
    def linear(self) -> bool:
        return bool(self.metadata.get("linear", False))

    @property
    def abort_reason(self) -> Optional[str]:
        return self.metadata.get("abort_reason")

    def prefix(self, count: int) -> "Trajectory":
        """The first count samples, sharing the stored fields."""
        return Trajectory(
            list(self.samples[:count]),
            list(self.derived[:count]),
            {key: list(values[:count]) for key, values in self.integrals.items()},
            list(self.leakage[:count]),
            list(self.parity_drift[:count]),
            dict(self.metadata),
        )
