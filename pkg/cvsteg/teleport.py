"""Braunstein-Kimble teleportation: Monte-Carlo shots, shot averages and the effective Gaussian channel.

Conventions (hbar from the cutoff):
  * The input and resource mode A meet on a 50-50 beamsplitter with the input
    first, so the first output port carries (in - A)/sqrt(2) and the second
    (in + A)/sqrt(2).
  * x is read on the first port and p on the second; with outcomes (x_m, p_m)
    the feed-forward displacement on mode B is D(g beta), beta = (x_m + i p_m)/sqrt(hbar).
  * Given beta, mode B is left in Tr_{in,A}[Phi(beta) (rho_in (x) rho_AB)] where
    Phi(beta) projects on (D(beta) (x) 1) sum_n |n>|n>.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from . import channels
from .channels import ChannelSpec
from .errors import DomainError, GridOverflow, ModeError, NonGaussianResource
from .fock_core import (
    MODE_A,
    Cutoff,
    DensityOperator,
    ModeOperator,
    PureState,
    State,
    beamsplitter,
    density_matrix,
    displacement_block,
    expectation,
    partial_trace,
    quadrature,
    quadrature_kets,
    quadrature_marginal,
    tensor,
    check_cutoffs,
)
from .metrics import fidelity

logger = logging.getLogger(__name__)

GRID_POINTS = 2048
GRID_SIGMAS = 6.0
GRID_MASS_TOL = 1e-4
BIN_NODES = 5


# ----------------------------------------------------------------------------
# Homodyne detection
# ----------------------------------------------------------------------------

def _quadrature_moments(rho: DensityOperator, which) -> Tuple[float, float]:
    q = quadrature(rho.cutoff, which)
    q2 = ModeOperator(q.mat @ q.mat, rho.cutoff)
    trace = rho.trace
    mean = expectation(rho, q).real / trace
    second = expectation(rho, q2).real / trace
    return mean, math.sqrt(max(second - mean * mean, 0.0))


def _bin_projector(cutoff: Cutoff, center: float, width: float, which) -> np.ndarray:
    """Fock matrix of the projector onto quadrature outcomes within ``width`` / 2 of ``center``."""
    nodes, weights = np.polynomial.legendre.leggauss(BIN_NODES)
    kets = quadrature_kets(cutoff, center + 0.5 * width * nodes, which)
    return (kets * (0.5 * width * weights)) @ kets.conj().T


def homodyne_sample(
    rng: np.random.Generator,
    rho: DensityOperator,
    which="x",
    mode: int = 0,
    points: int = GRID_POINTS,
) -> Tuple[float, DensityOperator]:
    """Measure quadrature ``which`` of ``mode`` and return (outcome, post-measurement state).

    The outcome is drawn by inverse CDF over the marginal on a grid spanning
    twelve standard deviations (at least twelve vacuum widths). The post-state
    is conditioned on the outcome bin, one grid step wide: the projected state
    for a single-mode input, the conditional state of the other mode for two.

    Raises:
        GridOverflow: if the grid captures less than 1 - 1e-4 of the marginal.
    """
    if mode not in (0, 1) or (rho.modes == 1 and mode != 0):
        raise ModeError(f"cannot measure mode {mode} of a {rho.modes}-mode state")
    cutoff = rho.cutoff
    reduced = rho if rho.modes == 1 else partial_trace(rho, mode)
    mean, sigma = _quadrature_moments(reduced, which)
    half = max(GRID_SIGMAS * sigma, GRID_SIGMAS * math.sqrt(cutoff.hbar / 2))
    grid = np.linspace(mean - half, mean + half, max(points, GRID_POINTS))
    step = grid[1] - grid[0]

    density = np.clip(quadrature_marginal(reduced, which, grid), 0.0, None)
    captured = density.sum() * step / reduced.trace
    if captured < 1.0 - GRID_MASS_TOL:
        raise GridOverflow(f"quadrature grid captured only {captured:.6f} of the marginal")

    cdf = np.cumsum(density)
    index = min(int(np.searchsorted(cdf, rng.random() * cdf[-1])), grid.size - 1)
    outcome = float(grid[index])
    projector = _bin_projector(cutoff, outcome, step, which)

    if rho.modes == 1:
        post = projector @ rho.mat @ projector
        post = 0.5 * (post + post.conj().T)
        return outcome, DensityOperator(post / np.trace(post).real, cutoff)

    t = rho.tensor4()
    if mode == 0:
        post = np.einsum("ca,abcd->bd", projector, t, optimize=True)
    else:
        post = np.einsum("db,abcd->ac", projector, t, optimize=True)
    post = 0.5 * (post + post.conj().T)
    return outcome, DensityOperator(post / np.trace(post).real, cutoff)


# ----------------------------------------------------------------------------
# Monte-Carlo protocol
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TeleportConfig:
    """Free parameters of one teleportation run."""
    resource: DensityOperator
    channel: ChannelSpec = field(default_factory=ChannelSpec.identity)
    shots: int = 1000
    gain: float = 1.0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.resource.modes != 2:
            raise ModeError("the teleportation resource must be a two-mode state")
        if self.shots < 1:
            raise DomainError(f"shots must be >= 1, got {self.shots}")
        if self.gain <= 0:
            raise DomainError(f"gain must be positive, got {self.gain}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True, eq=False)
class TeleportResult:
    avg_output: DensityOperator
    avg_fidelity: float
    per_shot_fidelities: np.ndarray
    stderr: float
    lost_mass: float


@lru_cache(maxsize=4)
def _balanced_beamsplitter(cutoff: Cutoff) -> np.ndarray:
    return beamsplitter(0.5, cutoff).mat


class BraunsteinKimble:
    """Teleport one input state through a prepared resource.

    The resource passed here is used as is; ``bk_teleport_average`` routes it
    through the configured channel first.
    """

    def __init__(self, input_state: State, resource: DensityOperator, gain: float = 1.0):
        if input_state.modes != 1:
            raise ModeError("the teleported input must be a single-mode state")
        check_cutoffs(input_state.cutoff, resource.cutoff)
        self.cutoff = resource.cutoff
        self.gain = gain
        self.input_state = input_state
        self.input_mat = density_matrix(input_state)
        self.resource4 = resource.tensor4()

        # The port statistics only see rho_in (x) rho_A.
        joint = tensor(DensityOperator(self.input_mat, self.cutoff), partial_trace(resource, MODE_A))
        u = _balanced_beamsplitter(self.cutoff)
        ports = u @ joint.mat @ u.conj().T
        self.ports = DensityOperator(0.5 * (ports + ports.conj().T), self.cutoff, 2)

    def _fidelity(self, output: np.ndarray) -> float:
        if isinstance(self.input_state, PureState):
            amps = self.input_state.amps
            return float(np.clip(np.vdot(amps, output @ amps).real, 0.0, 1.0))
        return fidelity(output, self.input_mat)

    def shot(self, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
        """One run of the protocol; returns the raw output matrix and its fidelity."""
        x_m, conditioned = homodyne_sample(rng, self.ports, "x", mode=0)
        p_m, _ = homodyne_sample(rng, conditioned, "p")
        beta = (x_m + 1j * p_m) / math.sqrt(self.cutoff.hbar)

        shift = displacement_block(beta, self.cutoff)
        sigma = shift.conj().T @ self.input_mat @ shift
        rho_b = np.einsum("ij,ibjc->bc", sigma, self.resource4, optimize=True)
        rho_b = rho_b / np.trace(rho_b).real

        correction = displacement_block(self.gain * beta, self.cutoff)
        output = correction @ rho_b @ correction.conj().T
        value = self._fidelity(output)
        logger.debug("shot: x=%.4f p=%.4f fidelity=%.4f", x_m, p_m, value)
        return output, value

    def run(self, shots: int, seed: int, workers: int = 1) -> TeleportResult:
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(shots)]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(self.shot, streams))
        else:
            results = [self.shot(rng) for rng in streams]

        total = np.zeros_like(self.input_mat)
        for output, _ in results:
            total += output
        avg = total / shots
        avg = 0.5 * (avg + avg.conj().T)
        fids = np.array([value for _, value in results])
        stderr = float(fids.std(ddof=1) / math.sqrt(shots)) if shots > 1 else 0.0
        avg_output = DensityOperator(avg, self.cutoff)
        logger.info("teleported %d shots: fidelity %.4f +/- %.4f", shots, fids.mean(), stderr)
        return TeleportResult(
            avg_output=avg_output,
            avg_fidelity=float(fids.mean()),
            per_shot_fidelities=fids,
            stderr=stderr,
            lost_mass=avg_output.lost_mass,
        )


def bk_teleport_shot(rng: np.random.Generator, input_state: State, config: TeleportConfig) -> Tuple[DensityOperator, float]:
    """Single shot with ``config.resource`` taken as already channel-applied."""
    output, value = BraunsteinKimble(input_state, config.resource, config.gain).shot(rng)
    return DensityOperator(output, config.resource.cutoff), value


def bk_teleport_average(input_state: State, config: TeleportConfig) -> TeleportResult:
    """Apply the channel to the resource, then average ``config.shots`` seeded shots."""
    resource = channels.apply(config.channel, config.resource)
    logger.info("teleporting through %s, %d shots, seed %d", config.channel.describe(), config.shots, config.seed)
    protocol = BraunsteinKimble(input_state, resource, config.gain)
    return protocol.run(config.shots, config.seed, config.workers)


# ----------------------------------------------------------------------------
# Closed forms and the effective Gaussian channel
# ----------------------------------------------------------------------------

def cat_fidelity_closed(noise_ratio: float, z: float) -> float:
    """Odd-cat fidelity after isotropic additive noise of variance noise_ratio * hbar."""
    if z <= 0:
        raise DomainError(f"cat amplitude must be positive, got {z}")
    if noise_ratio < 0:
        raise DomainError(f"noise ratio must be >= 0, got {noise_ratio}")
    e = noise_ratio
    z2 = z * z
    numerator = 1.0 + math.exp(-4 * z2) - math.exp(-4 * e * z2 / (1 + e)) - math.exp(-4 * z2 / (1 + e))
    return 1.0 / (1 + e) - numerator / (2 * (1 + e) * (1 - math.exp(-2 * z2)) ** 2)


def cat_fidelity_tmsv_closed(r: float, z: float) -> float:
    """Unity-gain teleportation fidelity of an odd cat of amplitude z through TMSV(r)."""
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    return cat_fidelity_closed(math.exp(-2 * r), z)


@dataclass(frozen=True)
class GaussianNoise:
    """Additive noise variances per quadrature picked up by the teleported mode."""
    var_x: float
    var_p: float

    @property
    def variance(self) -> float:
        """Common variance of phase-insensitive noise."""
        if not math.isclose(self.var_x, self.var_p, rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(f"noise is not phase-insensitive ({self.var_x:g} vs {self.var_p:g})")
        return 0.5 * (self.var_x + self.var_p)


def tmsv_covariance(r: float, hbar: float = 2.0) -> np.ndarray:
    """Covariance of TMSV(r) in the (x_A, p_A, x_B, p_B) ordering."""
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    return hbar / 2 * np.array([
        [c, 0, s, 0],
        [0, c, 0, -s],
        [s, 0, c, 0],
        [0, -s, 0, c],
    ])


def _block(mode: int) -> slice:
    return slice(2 * mode, 2 * mode + 2)


def resource_covariance(r: float, channel: Optional[ChannelSpec] = None, hbar: float = 2.0) -> Tuple[np.ndarray, bool]:
    """Covariance of the channel-applied TMSV and whether the resource is still Gaussian."""
    cov = tmsv_covariance(r, hbar)
    channel = channel or ChannelSpec.identity()
    if channel.kind == channels.WIRETAP:
        eta = channel.param
        mine, other = _block(channel.target_mode), _block(1 - channel.target_mode)
        cov[mine, mine] = eta * cov[mine, mine] + (1 - eta) * hbar / 2 * np.eye(2)
        cov[mine, other] *= math.sqrt(eta)
        cov[other, mine] *= math.sqrt(eta)
        return cov, True
    if channel.kind == channels.WERNER:
        p = channel.param
        product = cov.copy()
        product[_block(0), _block(1)] = 0
        product[_block(1), _block(0)] = 0
        return p * product + (1 - p) * cov, p in (0.0, 1.0)
    return cov, True


def effective_gaussian_channel(cov: np.ndarray, gain: float = 1.0, gaussian: bool = True) -> GaussianNoise:
    """Noise added to the input: Var(x_B - g x_A) and Var(p_B + g p_A)."""
    if not gaussian:
        raise NonGaussianResource("the effective channel needs a Gaussian resource; split Werner mixtures first")
    var_x = cov[2, 2] + gain ** 2 * cov[0, 0] - 2 * gain * cov[0, 2]
    var_p = cov[3, 3] + gain ** 2 * cov[1, 1] + 2 * gain * cov[1, 3]
    return GaussianNoise(float(var_x), float(var_p))


def werner_noise_branches(
    r: float,
    channel: Optional[ChannelSpec] = None,
    gain: float = 1.0,
    hbar: float = 2.0,
) -> List[Tuple[float, GaussianNoise]]:
    """(weight, noise) per Gaussian branch; a Werner resource splits into TMSV and product branches."""
    channel = channel or ChannelSpec.identity()
    if channel.kind != channels.WERNER:
        cov, gaussian = resource_covariance(r, channel, hbar)
        return [(1.0, effective_gaussian_channel(cov, gain, gaussian))]
    p = channel.param
    ideal = effective_gaussian_channel(tmsv_covariance(r, hbar), gain)
    broken, _ = resource_covariance(r, ChannelSpec.werner(1.0), hbar)
    branches = [(1.0 - p, ideal), (p, effective_gaussian_channel(broken, gain))]
    return [(w, noise) for w, noise in branches if w > 0]


def coherent_fidelity_closed(noise: GaussianNoise, hbar: float = 2.0) -> float:
    """Unity-gain coherent-state fidelity 1 / sqrt((1 + var_x/hbar)(1 + var_p/hbar))."""
    return 1.0 / math.sqrt((1 + noise.var_x / hbar) * (1 + noise.var_p / hbar))


def effective_teleport(input_state: State, noise: GaussianNoise, mode: int = 0) -> DensityOperator:
    """Teleported state through the additive-noise channel at unity gain."""
    rho = input_state.to_density() if isinstance(input_state, PureState) else input_state
    return channels.additive_noise_apply(rho, noise.variance, mode)


def mixture_teleport(input_state: State, branches: List[Tuple[float, GaussianNoise]], mode: int = 0) -> DensityOperator:
    """Weighted sum of effective_teleport over noise branches."""
    outputs = [(w, effective_teleport(input_state, noise, mode)) for w, noise in branches]
    mat = sum(w * out.mat for w, out in outputs)
    return DensityOperator(mat, input_state.cutoff, input_state.modes)
