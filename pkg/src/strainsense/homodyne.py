"""Homodyne X-quadrature records and strain estimation by linear inversion.

The measurement model is Gaussian: each shot draws from
``Normal(⟨X⟩, σ_X²)``. Sampling is *counter-based*: shot ``i`` of a stream
is a pure function of ``(seed, i)`` — word ``i mod 4`` of Philox block
``i // 4`` under ``key = seed`` — so any split of the shot range across
workers reproduces the serial record bit-for-bit. The uniform-to-normal
map is ``ndtri((raw >> 11)·2⁻⁵³ + 2⁻⁵⁴)``, strictly inside (0, 1).

Estimation inverts the calibrated signal model ``⟨X⟩ = offset + slope·ε``
with ``offset = g₀τ·s`` and ``slope = g₁τ·s``, where the scale ``s`` is 1
for a single polarized qubit and N for the GHZ readout. The offset is the
zero-strain signal that calibration subtracts; the slope is what converts
quadrature noise into strain uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .dynamics import CouplingParams
from .errors import DegenerateEstimatorError, ModelRangeError

#: quadrature-noise presets: the unity convention and the vacuum variance ⟨X²⟩ = 1/2
SIGMA_X_SQL = 1.0
SIGMA_X_VACUUM = 1.0 / sqrt(2.0)

#: rms noise floor used when sampling, so σ → 0⁺ stays well-defined
SIGMA_FLOOR = 1e-12

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class HomodyneModel:
    """Noise level, stream seed and shot count of one measurement record."""

    sigma_x: float
    seed: int
    shots: int

    def __post_init__(self) -> None:
        if self.sigma_x <= 0:
            raise ModelRangeError(f"sigma_x must be positive, got {self.sigma_x}")
        if self.shots < 1:
            raise ModelRangeError(f"shots must be >= 1, got {self.shots}")
        if not 0 <= self.seed <= _MASK64:
            raise ModelRangeError("seed must fit in 64 bits")


@dataclass(frozen=True)
class EstimationResult:
    """Inverted strain estimate with its analytic-form standard error."""

    eps_hat: float
    std_error: Optional[float]
    sample_mean_x: float
    shots_used: int


def derive_seed(base: int, k: int) -> int:
    """Stream seed for replicate ``k`` from a base seed (splitmix64 step).

    Golden-ratio increments fed through the splitmix64 finalizer give
    well-separated 64-bit keys for any (base, k), so replicates never share
    Philox streams.
    """
    z = (base + (k + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _raw_words(seed: int, start: int, count: int) -> np.ndarray:
    """Philox words [start, start+count) of the stream keyed by ``seed``."""
    first_block = start // 4
    last_block = (start + count - 1) // 4
    bg = np.random.Philox(key=np.uint64(seed), counter=[first_block, 0, 0, 0])
    words = bg.random_raw(4 * (last_block - first_block + 1))
    offset = start - 4 * first_block
    return words[offset : offset + count]


def sample_shots(
    mean_x: float, model: HomodyneModel, start_index: int = 0
) -> np.ndarray:
    """Draw ``model.shots`` Gaussian quadrature samples, deterministically.

    ``start_index`` selects where in the stream the record begins; sampling
    [0, a) and [a, n) separately concatenates to exactly the [0, n) record,
    which is what makes worker splits reproducible.
    """
    if start_index < 0:
        raise ModelRangeError("start_index must be non-negative")
    raw = _raw_words(model.seed, start_index, model.shots)
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54
    sigma = max(model.sigma_x, SIGMA_FLOOR)
    return mean_x + sigma * ndtri(u)


def _signal_scale(n: int, state_kind: str) -> float:
    if state_kind == "single":
        return 1.0
    if state_kind == "ghz":
        if n < 1:
            raise ModelRangeError("ghz readout needs n >= 1")
        return float(n)
    raise ModelRangeError(f"unknown state_kind {state_kind!r}")


def estimate_strain(
    samples: np.ndarray, cp: CouplingParams, n: int, state_kind: str = "single"
) -> EstimationResult:
    """Invert the calibrated linear signal model for ε̂.

    ``ε̂ = (mean(samples) − g₀τs)/(g₁τs)`` with scale s per ``state_kind``;
    the standard error is ``stddev(samples, ddof=1)/(|slope|·√shots)``
    (undefined for a single shot). The sample mean is permutation-
    invariant, so shot order never matters.

    Raises
    ------
    DegenerateEstimatorError
        If the slope ``g₁τs`` vanishes — ε is then invisible to the signal.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 1:
        raise ModelRangeError("samples must be a non-empty 1-d array")
    scale = _signal_scale(n, state_kind)
    slope = cp.g1 * cp.tau * scale
    if slope == 0.0:
        raise DegenerateEstimatorError("g1*tau*scale = 0: strain is unobservable")
    offset = cp.g0 * cp.tau * scale
    mean = float(samples.mean())
    shots = int(samples.size)
    if shots >= 2:
        std_error = float(samples.std(ddof=1) / (abs(slope) * sqrt(shots)))
    else:
        std_error = None
    return EstimationResult(
        eps_hat=(mean - offset) / slope,
        std_error=std_error,
        sample_mean_x=mean,
        shots_used=shots,
    )


def per_root_hz(delta_eps_shot: float, nu: float) -> float:
    """Convert a per-shot uncertainty to per-√Hz at ν shots per second."""
    if nu <= 0:
        raise ModelRangeError(f"nu must be positive, got {nu}")
    return delta_eps_shot / sqrt(nu)
