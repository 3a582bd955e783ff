"""Sup-plus-dissipation energy functionals along a trajectory.

    E0 = sup ||u, b||^2_{H^(2s+6)}           + int ||grad u||^2_{H^(2s+6)}
    E1 = sup ||u, b||^2_{Hdot^-sigma}        + int ||u||^2_{Hdot^(1-sigma)}
    e0 = sum_{m=0..s} sup A_m                + int B_m
    e1 = sum_{m=1..s-1} sup (1+t)^2 A_m      + int (1+t)^2 B_m

with A_m = ||u_t, b_t||^2_{Hdot^2m} + ||d_theta u, d_theta b||^2_{Hdot^2m} + ||u, b||^2_{Hdot^(2m+2)}
and  B_m = ||u_t, b_t||^2_{Hdot^(2m+1)} + ||d_theta u, d_theta b||^2_{Hdot^(2m+1)}.

Sups run over sample times; integrals use the trapezoidal rule between samples.
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from diagnostics.norms import RESOLUTION_TOLERANCE, gradient_squared, resolution_fraction_coefficients, sobolev_squared
from dynamics.state import State, Trajectory
from fields.background import d_theta_coefficients
from spectral.core import VectorField
from utils.exceptions import PreconditionError

SIGMA_MIN = 3.0 / 23.0


def check_parameters(s: int, sigma: Optional[float] = None) -> None:
    if int(s) != s or s < 1:
        raise PreconditionError(f"s must be an integer >= 1, got {s}")
    if sigma is not None and not SIGMA_MIN <= sigma < 1:
        raise PreconditionError(f"sigma must lie in [3/23, 1), got {sigma}")


def top_order(s: int) -> int:
    return 2 * s + 6


@dataclass(frozen=True)
class SampleTerms:
    """Everything the functionals need from one sample."""

    t: float
    top: float
    top_rate: float
    negative: float
    negative_rate: float
    sup_terms: np.ndarray
    rate_terms: np.ndarray
    resolution: float


def sample_terms(state: State, derived: Tuple[VectorField, VectorField], s: int, sigma: float) -> SampleTerms:
    g = state.grid
    u = state.u.coefficients
    b = state.b.coefficients
    u_t, b_t = (v.coefficients for v in derived)
    fields = np.stack([u, b])
    rates = np.stack([u_t, b_t])
    rotated = np.stack([d_theta_coefficients(u, g), d_theta_coefficients(b, g)])
    order = top_order(s)
    sup_terms = np.array(
        [
            sobolev_squared(rates, g, 2 * m)
            + sobolev_squared(rotated, g, 2 * m)
            + sobolev_squared(fields, g, 2 * m + 2)
            for m in range(s + 1)
        ]
    )
    rate_terms = np.array(
        [sobolev_squared(rates, g, 2 * m + 1) + sobolev_squared(rotated, g, 2 * m + 1) for m in range(s + 1)]
    )
    return SampleTerms(
        t=state.t,
        top=sobolev_squared(fields, g, order, homogeneous=False),
        top_rate=gradient_squared(u, g, order),
        negative=sobolev_squared(fields, g, -sigma),
        negative_rate=sobolev_squared(u, g, 1.0 - sigma),
        sup_terms=sup_terms,
        rate_terms=rate_terms,
        resolution=max(
            resolution_fraction_coefficients(u, g, order),
            resolution_fraction_coefficients(b, g, order),
        ),
    )


@dataclass(frozen=True)
class EnergyFunctionals:
    s: int
    sigma: float
    E0: float = 0.0
    E1: float = 0.0
    e0: float = 0.0
    e1: float = 0.0
    e0_terms: Tuple[Tuple[float, float], ...] = ()
    e1_terms: Tuple[Tuple[float, float], ...] = ()
    under_resolved: bool = False

    @property
    def E_total(self) -> float:
        return self.E0 + self.E1 + self.e0 + self.e1

    def as_dict(self) -> Dict:
        out = asdict(self)
        out["E_total"] = self.E_total
        out["e0_terms"] = [list(t) for t in self.e0_terms]
        out["e1_terms"] = [list(t) for t in self.e1_terms]
        return out


@dataclass
class FunctionalTracker:
    """Running E0, E1, e0, e1; feed it one sample at a time."""

    s: int
    sigma: float = SIGMA_MIN
    _last: Optional[SampleTerms] = field(default=None, repr=False)
    _sup: Dict[str, float] = field(default_factory=lambda: {"top": 0.0, "negative": 0.0}, repr=False)
    _int: Dict[str, float] = field(default_factory=lambda: {"top": 0.0, "negative": 0.0}, repr=False)
    _max_resolution: float = field(default=0.0, repr=False)

    def __post_init__(self):
        check_parameters(self.s, self.sigma)
        self._sup_m = np.zeros(self.s + 1)
        self._int_m = np.zeros(self.s + 1)
        self._wsup_m = np.zeros(self.s + 1)
        self._wint_m = np.zeros(self.s + 1)

    def observe(self, state: State, derived: Tuple[VectorField, VectorField]) -> EnergyFunctionals:
        return self.update(sample_terms(state, derived, self.s, self.sigma))

    def update(self, terms: SampleTerms) -> EnergyFunctionals:
        weight = (1.0 + terms.t) ** 2
        self._sup["top"] = max(self._sup["top"], terms.top)
        self._sup["negative"] = max(self._sup["negative"], terms.negative)
        self._sup_m = np.maximum(self._sup_m, terms.sup_terms)
        self._wsup_m = np.maximum(self._wsup_m, weight * terms.sup_terms)
        last = self._last
        if last is not None:
            if not terms.t > last.t:
                raise PreconditionError(f"sample time {terms.t} does not follow {last.t}")
            half = 0.5 * (terms.t - last.t)
            last_weight = (1.0 + last.t) ** 2
            self._int["top"] += half * (last.top_rate + terms.top_rate)
            self._int["negative"] += half * (last.negative_rate + terms.negative_rate)
            self._int_m += half * (last.rate_terms + terms.rate_terms)
            self._wint_m += half * (last_weight * last.rate_terms + weight * terms.rate_terms)
        self._last = terms
        self._max_resolution = max(self._max_resolution, terms.resolution)
        return self.current

    @property
    def current(self) -> EnergyFunctionals:
        weighted = range(1, self.s)
        return EnergyFunctionals(
            s=self.s,
            sigma=self.sigma,
            E0=self._sup["top"] + self._int["top"],
            E1=self._sup["negative"] + self._int["negative"],
            e0=float(np.sum(self._sup_m + self._int_m)),
            e1=float(sum(self._wsup_m[m] + self._wint_m[m] for m in weighted)),
            e0_terms=tuple((float(a), float(b)) for a, b in zip(self._sup_m, self._int_m)),
            e1_terms=tuple((float(self._wsup_m[m]), float(self._wint_m[m])) for m in weighted),
            under_resolved=self._max_resolution > RESOLUTION_TOLERANCE,
        )


def compute_functionals(traj: Trajectory, s: int, sigma: float = SIGMA_MIN) -> EnergyFunctionals:
    _require_derived(traj)
    tracker = FunctionalTracker(s, sigma)
    for state, derived in zip(traj.samples, traj.derived):
        tracker.observe(state, derived)
    return tracker.current


def sup_plus_integral(times: Sequence[float], sups: Sequence[float], rates: Sequence[float], weighted=False) -> float:
    times = np.asarray(times, dtype=float)
    sups = np.asarray(sups, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if not len(times):
        return 0.0
    if weighted:
        weight = (1.0 + times) ** 2
        sups = weight * sups
        rates = weight * rates
    integral = float(np.sum(0.5 * (rates[1:] + rates[:-1]) * np.diff(times)))
    return float(np.max(sups)) + integral


def _require_derived(traj: Trajectory) -> None:
    if len(traj.derived) != len(traj.samples):
        raise PreconditionError("the trajectory does not carry right-hand sides for every sample")


def energy_E0(traj: Trajectory, s: int) -> float:
    check_parameters(s)
    order = top_order(s)
    sups: List[float] = []
    rates: List[float] = []
    for state in traj.samples:
        g = state.grid
        fields = np.stack([state.u.coefficients, state.b.coefficients])
        sups.append(sobolev_squared(fields, g, order, homogeneous=False))
        rates.append(gradient_squared(state.u.coefficients, g, order))
    return sup_plus_integral(traj.times, sups, rates)


def energy_E1(traj: Trajectory, sigma: float = SIGMA_MIN) -> float:
    check_parameters(1, sigma)
    sups: List[float] = []
    rates: List[float] = []
    for state in traj.samples:
        g = state.grid
        fields = np.stack([state.u.coefficients, state.b.coefficients])
        sups.append(sobolev_squared(fields, g, -sigma))
        rates.append(sobolev_squared(state.u.coefficients, g, 1.0 - sigma))
    return sup_plus_integral(traj.times, sups, rates)


def _angular_sum(traj: Trajectory, s: int, orders: range, weighted: bool) -> float:
    _require_derived(traj)
    if not len(traj):
        return 0.0
    terms = [sample_terms(state, derived, s, SIGMA_MIN) for state, derived in zip(traj.samples, traj.derived)]
    return float(
        sum(
            sup_plus_integral(
                traj.times,
                [t.sup_terms[m] for t in terms],
                [t.rate_terms[m] for t in terms],
                weighted,
            )
            for m in orders
        )
    )


def energy_e0(traj: Trajectory, s: int) -> float:
    check_parameters(s)
    return _angular_sum(traj, s, range(0, s + 1), weighted=False)


def energy_e1(traj: Trajectory, s: int) -> float:
    """Raises PreconditionError for s < 2, where the sum over m = 1..s-1 is empty."""
    check_parameters(s)
    if s < 2:
        raise PreconditionError(f"e1 sums over m = 1..s-1 and is undefined for s={s}")
    return _angular_sum(traj, s, range(1, s), weighted=True)
