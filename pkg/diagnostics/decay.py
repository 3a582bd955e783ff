from typing import Tuple

import numpy as np

from diagnostics.norms import NormSeries
from utils.exceptions import InsufficientSamplesError

MIN_SAMPLES = 10


def decay_fit(series: NormSeries, t_min: float = 0.0) -> Tuple[float, float]:
    """Least-squares slope of log(value) against log(1 + t).

    Returns:
        (exponent, r2) where value ~ (1 + t)^exponent and r2 is the fit quality.
    """
    keep = (series.times >= t_min) & (series.values > 0)
    if keep.sum() < MIN_SAMPLES:
        raise InsufficientSamplesError(
            f"decay_fit needs {MIN_SAMPLES} positive samples after t={t_min}, got {int(keep.sum())}"
        )
    x = np.log1p(series.times[keep])
    y = np.log(series.values[keep])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    spread = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if spread == 0 else 1.0 - float(np.sum(residual**2)) / spread
    return float(slope), float(r2)
