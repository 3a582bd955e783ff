from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from fields.generators import Envelope, random_smooth_scalar, random_symmetric_field
from inequality_lab.estimates import commutator_estimate_ratio, poincare_ratio, product_estimate_ratio
from inequality_lab.interpolation import PRESETS, SIGMA_DEFAULT, gn_interpolation_ratio
from spectral.core import Grid, ParityClass
from utils.console import track
from utils.exceptions import PreconditionError

ESTIMATES = ("poincare", "product", "commutator")


def inequality_ids() -> List[str]:
    return list(ESTIMATES) + sorted(PRESETS)


@dataclass
class InequalityReport:
    inequality_id: str
    trials: int
    ratios: List[float] = field(default_factory=list)
    max_ratio: float = 0.0
    median_ratio: float = 0.0
    violations: int = 0
    parameters: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_ratios(cls, inequality_id: str, ratios: Sequence[float], parameters=None) -> "InequalityReport":
        """Infinite ratios (rhs == 0 < lhs) count as violations and stay out of the statistics."""
        ratios = [float(r) for r in ratios]
        finite = [r for r in ratios if np.isfinite(r)]
        return cls(
            inequality_id=inequality_id,
            trials=len(ratios),
            ratios=finite,
            max_ratio=float(max(finite)) if finite else 0.0,
            median_ratio=float(np.median(finite)) if finite else 0.0,
            violations=len(ratios) - len(finite),
            parameters=dict(parameters or {}),
        )

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def ensemble_survey(
    inequality: str,
    grid: Grid,
    trials: int,
    seed: int,
    envelope: Optional[Envelope] = None,
    k: int = 0,
    parity: ParityClass = ParityClass.VELOCITY_LIKE,
    sigma: float = SIGMA_DEFAULT,
) -> InequalityReport:
    """Ratios of one inequality over `trials` random inputs.

    Every trial draws from its own child of SeedSequence(seed), so a seed
    reproduces the report exactly.
    """
    if inequality not in ESTIMATES and inequality not in PRESETS:
        raise PreconditionError(f"unknown inequality {inequality!r}, expected one of {inequality_ids()}")
    if trials < 0:
        raise PreconditionError(f"trials must be >= 0, got {trials}")
    envelope = envelope or Envelope()
    parity = ParityClass(parity)
    children = np.random.SeedSequence(seed).spawn(trials)
    ratios = []
    for child in track(children, description=f"Surveying {inequality}...", total=trials):
        rng = np.random.default_rng(child)
        if inequality == "poincare":
            v = random_symmetric_field(rng, envelope, parity, 1.0, grid)
            ratios.append(poincare_ratio(v, k, parity))
        elif inequality in ("product", "commutator"):
            f = random_smooth_scalar(rng, envelope, grid)
            g = random_smooth_scalar(rng, envelope, grid)
            estimate = product_estimate_ratio if inequality == "product" else commutator_estimate_ratio
            ratios.append(estimate(f, g, k))
        else:
            v = random_symmetric_field(rng, envelope, parity, 1.0, grid)
            ratios.append(gn_interpolation_ratio(v, inequality, sigma))
    parameters = {
        "n": grid.n,
        "box_half_length": grid.box_half_length,
        "seed": seed,
        "k": k,
        "parity": parity.value,
        "sigma": sigma,
        "envelope": asdict(envelope),
    }
    return InequalityReport.from_ratios(inequality, ratios, parameters)
