"""Truncated Fock-space representation of a single resonator mode.

Conventions used throughout the package: dimensionless quadratures
``X = (a† + a)/√2`` and ``P = i(a† − a)/√2`` with commutator ``[X, P] = i``
and vacuum variance 1/2 in each quadrature. No ħ/2 variant is offered.

The conditional-displacement unitary ``exp(−iθP)`` (the resonator factor of
a spin-conditioned drive, for one fixed spin eigenvalue) is provided in two
independent implementations: a scaled matrix exponential (the oracle) and a
closed-form displacement matrix built from associated Laguerre polynomials
(the fast path). Both are kept permanently; tests compare them on the
truncation-safe subspace.

Truncation bookkeeping: a state is "truncation-safe" when the probability
mass on its top two Fock levels is below 1e−8. Displacements are accepted
only when the eventual support fits the cutoff under the sufficiency rule
``|α|² + 8|α| + 10 ≤ cutoff`` (α = θ/√2), which keeps Poisson tails of the
displaced vacuum at ~1e−9 or below.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import ceil, sqrt
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import CutoffError, StateError, TruncationError

#: tail-mass threshold below which a state counts as truncation-safe
TAIL_MASS_TOL = 1e-8

#: allowed deviation of the state norm from unity
NORM_TOL = 1e-10


class TruncationWarning(UserWarning):
    """Emitted when an operation touches a truncation-unsafe state."""


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space spanning ``|0⟩ … |cutoff−1⟩``.

    Parameters
    ----------
    cutoff:
        Dimension of the truncated space; at least 4.
    """

    cutoff: int

    def __post_init__(self) -> None:
        if self.cutoff < 4:
            raise StateError(f"Fock cutoff must be >= 4, got {self.cutoff}")


@dataclass
class ResonatorState:
    """Pure resonator state as a complex amplitude vector over Fock levels.

    The amplitudes are normalized on construction (deviations beyond
    `NORM_TOL` are rejected rather than silently rescaled, since they
    indicate an upstream bug, not truncation loss).
    """

    amplitudes: np.ndarray
    space: FockSpace = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.space is None:
            self.space = FockSpace(len(amps))
        if amps.shape != (self.space.cutoff,):
            raise StateError(
                f"amplitude vector of length {amps.shape} does not match "
                f"cutoff {self.space.cutoff}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state norm {norm!r} deviates from 1 beyond tolerance")
        self.amplitudes = amps

    @property
    def tail_mass(self) -> float:
        """Probability mass on the top two Fock levels."""
        return float(np.sum(np.abs(self.amplitudes[-2:]) ** 2))

    @property
    def is_truncation_safe(self) -> bool:
        return self.tail_mass < TAIL_MASS_TOL


class Moments(NamedTuple):
    mean_x: float
    mean_p: float
    var_x: float
    var_p: float
    mean_p_sq: float
    mean_n: float
    truncation_safe: bool


def quadrature_operators(space: FockSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build dense X, P and annihilation operators on the truncated space.

    Returns
    -------
    (X, P, a):
        ``X`` and ``P`` are Hermitian by construction; ``a`` carries
        ``a|n⟩ = √n |n−1⟩`` with the top row/column clipped by the cutoff,
        so ``[X, P] = i·1`` holds exactly only away from the last two levels.
    """
    n = space.cutoff
    a = np.diag(np.sqrt(np.arange(1, n)), k=1).astype(complex)
    adag = a.conj().T
    x = (adag + a) / sqrt(2.0)
    p = 1j * (adag - a) / sqrt(2.0)
    return x, p, a


def vacuum_state(space: FockSpace) -> ResonatorState:
    """The Fock ground state ``|0⟩``."""
    amps = np.zeros(space.cutoff, dtype=complex)
    amps[0] = 1.0
    return ResonatorState(amps, space)


def coherent_state(alpha: complex, space: FockSpace) -> ResonatorState:
    """Coherent state ``|α⟩`` with amplitudes ``e^{−|α|²/2} αⁿ/√n!``.

    The cutoff must satisfy the sufficiency rule
    ``|α|² + 8|α| + 10 ≤ cutoff`` so that the truncated tail mass stays
    below `TAIL_MASS_TOL`; the amplitudes are renormalized after
    truncation.

    Raises
    ------
    TruncationError
        If the cutoff is insufficient for this amplitude.
    """
    mag = abs(alpha)
    if mag * mag + 8.0 * mag + 10.0 > space.cutoff:
        raise TruncationError(
            f"cutoff {space.cutoff} insufficient for |alpha| = {mag:.4g}; "
            f"need at least {required_cutoff(mag)}"
        )
    amps = np.empty(space.cutoff, dtype=complex)
    amps[0] = np.exp(-0.5 * mag * mag)
    for n in range(1, space.cutoff):
        amps[n] = amps[n - 1] * alpha / sqrt(n)
    amps /= np.linalg.norm(amps)
    return ResonatorState(amps, space)


def required_cutoff(alpha_max: float) -> int:
    """Smallest cutoff that keeps all scheduled displacements safe.

    Adaptive rule ``ceil(α² + 8α + 15)`` for the largest amplitude
    ``α = |θ|_max/√2`` that a run will produce; the +15 headroom keeps the
    sufficiency rule satisfied with margin after repeated displacements.
    """
    a = abs(alpha_max)
    return int(ceil(a * a + 8.0 * a + 15.0))


def theta_max(space: FockSpace) -> float:
    """Largest displacement argument θ the cutoff supports.

    Inverts the coherent sufficiency rule for ``α = θ/√2``:
    ``θ_max = √2 (√(cutoff + 6) − 4)``, clipped at zero.
    """
    return max(0.0, sqrt(2.0) * (sqrt(space.cutoff + 6.0) - 4.0))


def safe_column_count(theta: float, space: FockSpace) -> int:
    """Number of leading Fock columns on which ``exp(−iθP)`` is trustworthy.

    Displacing ``|n⟩`` by ``α = |θ|/√2`` spreads support up to roughly
    ``n + α² + O(α√n)`` levels; column ``n`` counts as safe when
    ``n + α² + 8α√(n+1) + 10 ≤ cutoff``. The bound is monotone in ``n`` so
    the safe columns form a contiguous leading block.
    """
    a = abs(theta) / sqrt(2.0)
    ns = np.arange(space.cutoff)
    ok = ns + a * a + 8.0 * a * np.sqrt(ns + 1.0) + 10.0 <= space.cutoff
    return int(np.count_nonzero(ok))


def displacement_matrix(alpha: complex, space: FockSpace) -> np.ndarray:
    """Matrix elements ``⟨m|D(α)|n⟩`` of the displacement operator.

    Uses the closed form in terms of associated Laguerre polynomials,

    ``⟨m|D(α)|n⟩ = √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)`` (m ≥ n)

    with the lower triangle from ``⟨m|D(α)|n⟩ = ⟨n|D(−α)|m⟩*``. Factorial
    ratios and the ``|α|^{m−n}`` magnitude both go through log space (the
    phase left outside is unit-modulus), so the elements stay finite far
    beyond where a literal evaluation of ``α^{m−n}`` would overflow; the
    Laguerre values come from scipy's stable recurrences.
    """
    dim = space.cutoff
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    m_idx, n_idx = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    lo = np.minimum(m_idx, n_idx)
    d = np.abs(m_idx - n_idx)
    # log of sqrt(lo!/hi!)·|α|^d and the Gaussian envelope
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(lo + d + 1)) + d * np.log(
        abs(alpha)
    ) - 0.5 * x
    lag = eval_genlaguerre(lo, d, x)
    # unit-modulus phase via angle(); dividing by |alpha| is not robust
    # for subnormal amplitudes
    unit = np.exp(1j * np.angle(alpha))
    upper = np.power(unit, d.astype(float))
    lower = np.power(-np.conj(unit), d.astype(float))
    coef = np.where(m_idx >= n_idx, upper, lower)
    out = np.exp(log_pref) * lag * coef
    if not np.all(np.isfinite(out)):
        raise CutoffError(
            f"closed-form displacement elements overflow at |alpha| = "
            f"{abs(alpha):.4g}, cutoff = {dim}; use method='series'"
        )
    return out


def conditional_displacement(
    theta: float, space: FockSpace, method: str = "closed_form"
) -> np.ndarray:
    """The unitary ``exp(−iθP)`` on the truncated space.

    For real θ this equals the displacement ``D(θ/√2)`` since
    ``−iθP = (θ/√2)(a† − a)``; it shifts ``⟨X⟩`` by +θ and leaves ``⟨P⟩``
    unchanged.

    Parameters
    ----------
    theta:
        Real displacement argument; ``|θ|`` must not exceed
        `theta_max` for the space.
    method:
        ``"series"`` for the scaled matrix exponential of ``−iθP`` (oracle),
        ``"closed_form"`` for the Laguerre displacement matrix (fast path).

    Raises
    ------
    TruncationError
        If ``|θ|`` exceeds what the cutoff supports.
    """
    if abs(theta) > theta_max(space):
        raise TruncationError(
            f"displacement theta = {theta:.4g} exceeds theta_max = "
            f"{theta_max(space):.4g} for cutoff {space.cutoff}"
        )
    if method == "series":
        _, p, _ = quadrature_operators(space)
        return expm(-1j * theta * p)
    if method == "closed_form":
        return displacement_matrix(theta / sqrt(2.0), space)
    raise ValueError(f"unknown displacement method {method!r}")


def displace(
    state: ResonatorState, theta: float, method: str = "closed_form"
) -> ResonatorState:
    """Apply ``exp(−iθP)`` to a state, renormalizing truncation loss.

    A `TruncationWarning` is emitted when the input or the result is not
    truncation-safe; the returned amplitudes are renormalized so downstream
    expectation values stay well-defined.
    """
    if not state.is_truncation_safe:
        warnings.warn(
            f"displacing a truncation-unsafe state (tail mass {state.tail_mass:.3g})",
            TruncationWarning,
            stacklevel=2,
        )
    u = conditional_displacement(theta, state.space, method=method)
    amps = u @ state.amplitudes
    amps = amps / np.linalg.norm(amps)
    out = ResonatorState(amps, state.space)
    if not out.is_truncation_safe:
        warnings.warn(
            f"displacement produced a truncation-unsafe state "
            f"(tail mass {out.tail_mass:.3g})",
            TruncationWarning,
            stacklevel=2,
        )
    return out


def overlap(a: ResonatorState, b: ResonatorState) -> complex:
    """Inner product ``⟨a|b⟩`` of two states on the same space."""
    if a.space.cutoff != b.space.cutoff:
        raise StateError("states live on different Fock spaces")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def moments(state: ResonatorState) -> Moments:
    """Quadrature and number moments of a normalized state.

    Returns means and variances of X and P, the raw second moment ``⟨P²⟩``
    and ``⟨n̂⟩``, all against the truncated operators, plus the state's
    truncation-safety flag so callers can judge whether the numbers are
    trustworthy.
    """
    norm = np.linalg.norm(state.amplitudes)
    if abs(norm - 1.0) > NORM_TOL:
        raise StateError(f"moments of a non-normalized state (norm {norm!r})")
    x, p, _ = quadrature_operators(state.space)
    psi = state.amplitudes
    xpsi = x @ psi
    ppsi = p @ psi
    mean_x = float(np.real(np.vdot(psi, xpsi)))
    mean_p = float(np.real(np.vdot(psi, ppsi)))
    mean_x_sq = float(np.real(np.vdot(xpsi, xpsi)))
    mean_p_sq = float(np.real(np.vdot(ppsi, ppsi)))
    mean_n = float(np.sum(np.arange(state.space.cutoff) * np.abs(psi) ** 2))
    return Moments(
        mean_x=mean_x,
        mean_p=mean_p,
        var_x=mean_x_sq - mean_x**2,
        var_p=mean_p_sq - mean_p**2,
        mean_p_sq=mean_p_sq,
        mean_n=mean_n,
        truncation_safe=state.is_truncation_safe,
    )
