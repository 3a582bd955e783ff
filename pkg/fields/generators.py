"""Seeded random data that satisfies the symmetry and support conditions.

A field is the perpendicular gradient of a stream

    psi = taper(r) * exp(-r^2 / 2 l^2) * sum_ab c_ab T_ab(x1 / l, x2 / l)

with c_ab ~ N(0, 1) (1 + a^2 + b^2)^(-decay / 2). Velocity_like streams are
odd-odd, T_ab = sin(a y1) sin(b y2). Magnetic_like streams are even-even,
T_ab = cos(a y1) cos(b y2) - J0(sqrt(a^2 + b^2) |y|), where J0 is the circle
average of the cosine product. Neither stream has a circle average, so the
data carries no rigid swirl f(r) e_theta: such a swirl in b is a steady
state of the system and never decays.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from diagnostics.norms import sobolev_norm
from fields.parity import parity_project
from fields.stream import from_stream
from spectral.core import Grid, ParityClass, ScalarField, VectorField, dealias, fft_forward
from utils.exceptions import PreconditionError

Seed = Union[int, np.random.SeedSequence, np.random.Generator]

DEFAULT_S = 2
DEFAULT_SIGMA = 3.0 / 23.0


@dataclass(frozen=True)
class Envelope:
    """Spectral content of generated data.

    Args:
        width       : Gaussian width in units of L.
        max_mode    : highest trigonometric mode per direction.
        decay       : power-law decay of the random coefficients.
        taper_start : fraction of the core radius where the C-infinity taper begins.
    """

    width: float = 0.35
    max_mode: int = 2
    decay: float = 2.0
    taper_start: float = 0.75

    def __post_init__(self):
        if not self.width > 0:
            raise PreconditionError(f"envelope width must be > 0, got {self.width}")
        if self.max_mode < 1:
            raise PreconditionError(f"envelope max_mode must be >= 1, got {self.max_mode}")
        if not 0 < self.taper_start < 1:
            raise PreconditionError(f"taper_start must lie in (0, 1), got {self.taper_start}")


def smooth_cutoff(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for t <= 0, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)

    def bump(x):
        safe = np.where(x > 0, x, 1.0)
        return np.where(x > 0, np.exp(-1.0 / safe), 0.0)

    up = bump(1.0 - t)
    return up / (up + bump(t))


def taper(grid: Grid, envelope: Envelope) -> np.ndarray:
    start = envelope.taper_start * grid.core_radius
    return smooth_cutoff((grid.radius - start) / (grid.core_radius - start))


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_stream(seed: Seed, envelope: Envelope, parity: ParityClass, grid: Grid) -> ScalarField:
    rng = _rng(seed)
    scale = envelope.width * grid.box_half_length
    y1 = grid.x1 / scale
    y2 = grid.x2 / scale
    rho = grid.radius / scale
    velocity_like = ParityClass(parity) is ParityClass.VELOCITY_LIKE
    if velocity_like:
        pairs = [(a, b) for a in range(1, envelope.max_mode + 1) for b in range(1, envelope.max_mode + 1)]
    else:
        # (0, 0) is purely radial and would vanish anyway
        pairs = [(a, b) for a in range(envelope.max_mode + 1) for b in range(envelope.max_mode + 1) if a or b]
    series = np.zeros(grid.shape)
    for a, b in pairs:
        weight = (1.0 + a * a + b * b) ** (-envelope.decay / 2.0)
        if velocity_like:
            term = np.sin(a * y1) * np.sin(b * y2)
        else:
            term = np.cos(a * y1) * np.cos(b * y2) - special.j0(np.hypot(a, b) * rho)
        series += rng.standard_normal() * weight * term
    envelope_values = taper(grid, envelope) * np.exp(-0.5 * (grid.radius / scale) ** 2)
    return ScalarField.from_coefficients(fft_forward(envelope_values * series), grid)


def smallness_norm(v: VectorField, s: int = DEFAULT_S, sigma: float = DEFAULT_SIGMA) -> float:
    """||v||_{H^-sigma homogeneous} + ||v||_{H^(2s+6)}, the size measure of initial data."""
    return sobolev_norm(v, -sigma, homogeneous=True) + sobolev_norm(v, 2 * s + 6, homogeneous=False)


def random_symmetric_field(
    seed: Seed,
    envelope: Envelope,
    parity: ParityClass,
    amplitude: float,
    grid: Grid,
    s: int = DEFAULT_S,
    sigma: float = DEFAULT_SIGMA,
) -> VectorField:
    """Divergence-free, class-exact, core-supported field with smallness_norm == amplitude.

    The same seed always gives the same field bit for bit.
    """
    if not amplitude > 0:
        raise PreconditionError(f"amplitude must be > 0, got {amplitude}")
    parity = ParityClass(parity)
    stream = random_stream(seed, envelope, parity, grid)
    v = parity_project(dealias(from_stream(stream, parity)), parity)
    size = smallness_norm(v, s, sigma)
    if size == 0:
        return v
    return v.scaled(amplitude / size)


def random_smooth_scalar(seed: Seed, envelope: Envelope, grid: Grid) -> ScalarField:
    """Gaussian-enveloped scalar without any symmetry, for inequality surveys."""
    rng = _rng(seed)
    scale = envelope.width * grid.box_half_length
    shift = rng.uniform(-0.5, 0.5, size=2) * scale
    y1 = (grid.x1 - shift[0]) / scale
    y2 = (grid.x2 - shift[1]) / scale
    series = np.zeros(grid.shape)
    for a in range(envelope.max_mode + 1):
        for b in range(envelope.max_mode + 1):
            weight = (1.0 + a * a + b * b) ** (-envelope.decay / 2.0)
            phase1, phase2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
            series += rng.standard_normal() * weight * np.cos(a * y1 + phase1) * np.cos(b * y2 + phase2)
    values = taper(grid, envelope) * np.exp(-0.5 * (y1**2 + y2**2)) * series
    return dealias(ScalarField.from_coefficients(fft_forward(values), grid))
