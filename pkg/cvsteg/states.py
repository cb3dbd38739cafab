"""Constructors for the states used across the protocols."""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CutoffTooSmall, DomainError
from .fock_core import Cutoff, DensityOperator, PureState, hermite_functions

logger = logging.getLogger(__name__)

# Position grid for the exact SUM gate in gkp_bell.
BELL_GRID_STEP = 0.05
BELL_GRID_HALF_WIDTH = 24.0


@dataclass(frozen=True)
class GkpParams:
    """Encoded qubit cos(theta/2)|0> + sin(theta/2)|1> on a regularized square lattice."""
    theta: float = 0.0
    epsilon: float = 0.1
    k_range: int = 10

    def __post_init__(self):
        if self.epsilon <= 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if self.k_range < 1:
            raise DomainError(f"k_range must be >= 1, got {self.k_range}")


def vacuum(cutoff: Cutoff) -> PureState:
    return fock(0, cutoff)


def fock(n: int, cutoff: Cutoff) -> PureState:
    if not 0 <= n < cutoff.n_max:
        raise DomainError(f"Fock level {n} outside [0, {cutoff.n_max})")
    amps = np.zeros(cutoff.n_max, dtype=complex)
    amps[n] = 1.0
    return PureState(amps, cutoff)


def thermal(nbar: float, cutoff: Cutoff) -> DensityOperator:
    """Geometric mixture (1/(nbar+1)) (nbar/(nbar+1))^n |n><n|."""
    if nbar < 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar}")
    n = np.arange(cutoff.n_max)
    if nbar == 0:
        weights = (n == 0).astype(float)
    else:
        weights = (nbar / (nbar + 1.0)) ** n / (nbar + 1.0)
    return DensityOperator(np.diag(weights), cutoff)


def tmsv_amplitudes(r: float, cutoff: Cutoff) -> np.ndarray:
    """Coefficient matrix sech(r) tanh(r)^n on the |nn> diagonal."""
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    n = np.arange(cutoff.n_max)
    return np.diag(np.tanh(r) ** n / np.cosh(r)).astype(complex)


def tmsv(r: float, cutoff: Cutoff) -> DensityOperator:
    """Two-mode squeezed vacuum sech^2(r) sum (tanh r)^{n+m} |nn><mm|."""
    return PureState(tmsv_amplitudes(r, cutoff), cutoff, modes=2).to_density()


def _coherent_amps(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max)
    if alpha == 0:
        return (n == 0).astype(complex)
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent(alpha: complex, cutoff: Cutoff) -> PureState:
    """|alpha> with amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!)."""
    return PureState(_coherent_amps(alpha, cutoff.n_max), cutoff)


def cat_odd(alpha: complex, cutoff: Cutoff) -> PureState:
    """(|alpha> - |-alpha>)/N with N^2 = 2(1 - e^{-2|alpha|^2}).

    Normalized analytically so mass lost to the cutoff stays visible.
    """
    if alpha == 0:
        raise DomainError("odd cat state is undefined at alpha = 0")
    plus = _coherent_amps(alpha, cutoff.n_max)
    minus = _coherent_amps(-alpha, cutoff.n_max)
    norm = math.sqrt(2.0 * (1.0 - math.exp(-2.0 * abs(alpha) ** 2)))
    amps = (plus - minus) / norm
    amps[::2] = 0.0
    return PureState(amps, cutoff)


def _check_envelope(epsilon: float, cutoff: Cutoff):
    tail = math.exp(-2.0 * epsilon * cutoff.n_max)
    if tail > cutoff.tau_norm:
        warnings.warn(
            f"GKP envelope e^(-2 eps n_max)={tail:.2e} exceeds tau_norm at n_max={cutoff.n_max}",
            CutoffTooSmall,
            stacklevel=3,
        )


def _lattice_coefficients(mu: int, epsilon: float, k_range: int, cutoff: Cutoff) -> np.ndarray:
    spacing = math.sqrt(cutoff.hbar * math.pi)
    peaks = (2.0 * np.arange(-k_range, k_range + 1) + mu) * spacing
    psi = hermite_functions(cutoff.n_max, peaks, cutoff.hbar)
    coeffs = np.exp(-epsilon * np.arange(cutoff.n_max)) * psi.sum(axis=1)
    return coeffs / np.linalg.norm(coeffs)


def gkp_logical(mu: int, params: GkpParams, cutoff: Cutoff) -> PureState:
    """Regularized |mu_eps> = e^{-eps n} sum_k |x = (2k + mu) sqrt(hbar pi)>, normalized."""
    if mu not in (0, 1):
        raise DomainError(f"logical index must be 0 or 1, got {mu}")
    _check_envelope(params.epsilon, cutoff)
    return PureState(_lattice_coefficients(mu, params.epsilon, params.k_range, cutoff), cutoff)


def gkp(params: GkpParams, cutoff: Cutoff) -> PureState:
    """cos(theta/2)|0_eps> + sin(theta/2)|1_eps>, renormalized."""
    _check_envelope(params.epsilon, cutoff)
    zero = _lattice_coefficients(0, params.epsilon, params.k_range, cutoff)
    one = _lattice_coefficients(1, params.epsilon, params.k_range, cutoff)
    amps = math.cos(params.theta / 2) * zero + math.sin(params.theta / 2) * one
    return PureState(amps / np.linalg.norm(amps), cutoff)


def gkp_plus(epsilon: float, cutoff: Cutoff, k_range: int = 10) -> PureState:
    return gkp(GkpParams(theta=math.pi / 2, epsilon=epsilon, k_range=k_range), cutoff)


def gkp_bell(epsilon: float, cutoff: Cutoff, k_range: int = 10) -> PureState:
    """Logical Bell pair: SUM gate exp(-i x1 p2 / hbar) on |+_eps>|0_eps>.

    The gate shifts the second position by the first, so it is applied on a
    position grid as Psi(x1, x2) -> Psi1(x1) Psi2(x2 - x1) and projected back
    onto the Fock basis.
    """
    plus = gkp_plus(epsilon, cutoff, k_range).amps
    zero = gkp_logical(0, GkpParams(0.0, epsilon, k_range), cutoff).amps

    step = BELL_GRID_STEP
    count = int(round(BELL_GRID_HALF_WIDTH / step))
    grid = step * np.arange(-count, count + 1)
    diffs = step * np.arange(-2 * count, 2 * count + 1)
    h_grid = hermite_functions(cutoff.n_max, grid, cutoff.hbar)
    h_diff = hermite_functions(cutoff.n_max, diffs, cutoff.hbar)

    first = plus @ h_grid
    second = zero @ h_diff
    size = grid.size
    offset = np.arange(size)[None, :] - np.arange(size)[:, None] + (size - 1)
    wavefunction = first[:, None] * second[offset]

    coeffs = step ** 2 * (h_grid @ wavefunction @ h_grid.T)
    captured = np.linalg.norm(coeffs)
    logger.debug("gkp_bell: projected norm %.8f at n_max=%d", captured, cutoff.n_max)
    return PureState((coeffs / captured).ravel(), cutoff, modes=2)
