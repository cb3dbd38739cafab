"""Eavesdropper channels: probabilistic entanglement breaking and the wiretap (pure loss)."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, ModeError
from .fock_core import (
    MODE_B,
    Cutoff,
    DensityOperator,
    apply_kraus,
    partial_trace,
    tensor,
)

logger = logging.getLogger(__name__)

IDENTITY = "identity"
WERNER = "werner"
WIRETAP = "wiretap"
CHANNEL_KINDS = (IDENTITY, WERNER, WIRETAP)


@dataclass(frozen=True)
class ChannelSpec:
    """One eavesdropper channel.

    ``param`` is the measurement probability p for ``werner`` and the
    transmissivity eta for ``wiretap``; ``target_mode`` is the resource mode
    that travels through the channel.
    """
    kind: str = IDENTITY
    param: float = 0.0
    target_mode: int = MODE_B

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise DomainError(f"unknown channel kind {self.kind!r}, expected one of {CHANNEL_KINDS}")
        if not 0.0 <= self.param <= 1.0:
            raise DomainError(f"{self.kind} parameter must lie in [0, 1], got {self.param}")
        if self.target_mode not in (0, 1):
            raise ModeError(f"target mode must be 0 or 1, got {self.target_mode}")

    @classmethod
    def identity(cls) -> "ChannelSpec":
        return cls(IDENTITY, 0.0)

    @classmethod
    def werner(cls, p: float) -> "ChannelSpec":
        return cls(WERNER, p)

    @classmethod
    def wiretap(cls, eta: float, target_mode: int = MODE_B) -> "ChannelSpec":
        return cls(WIRETAP, eta, target_mode)

    def describe(self) -> str:
        if self.kind == WERNER:
            return f"werner(p={self.param:g})"
        if self.kind == WIRETAP:
            return f"wiretap(eta={self.param:g}, mode={self.target_mode})"
        return IDENTITY


def _check_probability(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")


def werner_apply(rho_ab: DensityOperator, p: float) -> DensityOperator:
    """p Tr_B(rho) (x) Tr_A(rho) + (1 - p) rho."""
    _check_probability("p", p)
    if rho_ab.modes != 2:
        raise ModeError("the entanglement-breaking channel acts on two-mode states")
    if p == 0:
        return rho_ab
    product = tensor(partial_trace(rho_ab, 0), partial_trace(rho_ab, 1))
    return DensityOperator(p * product.mat + (1.0 - p) * rho_ab.mat, rho_ab.cutoff, 2)


def werner_sample(rng: np.random.Generator, rho_ab: DensityOperator, p: float) -> DensityOperator:
    """One shot of the channel: the product-of-marginals branch with probability p."""
    _check_probability("p", p)
    if rng.random() < p:
        return werner_apply(rho_ab, 1.0)
    return rho_ab


def loss_kraus(eta: float, cutoff: Cutoff) -> List[np.ndarray]:
    """Kraus family <k|_E U_BS(eta) |0>_E of the pure-loss channel.

    A_k[n - k, n] = sqrt(C(n, k)) eta^{(n-k)/2} (1 - eta)^{k/2}.
    """
    _check_probability("eta", eta)
    n_max = cutoff.n_max
    n = np.arange(n_max)
    ops = []
    for k in range(n_max):
        src = n[k:]
        log_binom = gammaln(src + 1) - gammaln(k + 1) - gammaln(src - k + 1)
        amp = np.exp(0.5 * log_binom) * eta ** ((src - k) / 2.0) * (1.0 - eta) ** (k / 2.0)
        op = np.zeros((n_max, n_max))
        op[src - k, src] = amp
        ops.append(op)
    return ops


def amplifier_kraus(gain: float, cutoff: Cutoff) -> List[np.ndarray]:
    """Quantum-limited phase-insensitive amplifier, B_k[n+k, n] = sqrt(C(n+k, k)) G^{-(n+1)/2} (1 - 1/G)^{k/2}.

    Levels pushed above the cutoff are dropped; the resulting trace deficit is
    reported by the DensityOperator built from the output.
    """
    if gain < 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {gain}")
    n_max = cutoff.n_max
    if gain == 1.0:
        return [np.eye(n_max)]
    ops = []
    for k in range(n_max):
        src = np.arange(n_max - k)
        log_binom = gammaln(src + k + 1) - gammaln(k + 1) - gammaln(src + 1)
        amp = np.exp(0.5 * log_binom) * gain ** (-(src + 1) / 2.0) * (1.0 - 1.0 / gain) ** (k / 2.0)
        op = np.zeros((n_max, n_max))
        op[src + k, src] = amp
        ops.append(op)
    return ops


def _target(rho: DensityOperator, mode: int) -> int:
    if rho.modes == 1:
        return 0
    if mode not in (0, 1):
        raise ModeError(f"mode index must be 0 or 1, got {mode}")
    return mode


def wiretap_apply(rho: DensityOperator, eta: float, mode: int = MODE_B) -> DensityOperator:
    """Beamsplitter eta against a vacuum environment on ``mode``; the environment goes to Eve."""
    _check_probability("eta", eta)
    if eta == 1.0:
        return rho
    target = _target(rho, mode)
    mat = apply_kraus(rho.mat, loss_kraus(eta, rho.cutoff), rho.cutoff.n_max, rho.modes, target)
    return DensityOperator(mat, rho.cutoff, rho.modes)


def additive_noise_apply(rho: DensityOperator, variance: float, mode: int = 0) -> DensityOperator:
    """Classical Gaussian displacement noise of ``variance`` per quadrature.

    Pure loss eta = hbar / (hbar + variance) followed by amplification 1/eta.
    """
    if variance < 0:
        raise DomainError(f"noise variance must be >= 0, got {variance}")
    if variance == 0:
        return rho
    hbar = rho.cutoff.hbar
    eta = hbar / (hbar + variance)
    target = _target(rho, mode)
    n_max = rho.cutoff.n_max
    lossy = apply_kraus(rho.mat, loss_kraus(eta, rho.cutoff), n_max, rho.modes, target)
    amplified = apply_kraus(lossy, amplifier_kraus(1.0 / eta, rho.cutoff), n_max, rho.modes, target)
    logger.debug("additive noise %.4g: loss %.4f then gain %.4f", variance, eta, 1.0 / eta)
    return DensityOperator(amplified, rho.cutoff, rho.modes)


def apply(spec: ChannelSpec, rho: DensityOperator) -> DensityOperator:
    if spec.kind == WERNER:
        return werner_apply(rho, spec.param)
    if spec.kind == WIRETAP:
        return wiretap_apply(rho, spec.param, spec.target_mode)
    return rho


def apply_many(specs: Sequence[ChannelSpec], rho: DensityOperator) -> DensityOperator:
    for spec in specs:
        rho = apply(spec, rho)
    return rho


@dataclass(frozen=True)
class ChannelSequence:
    """Channels applied left to right; an empty sequence is the identity."""
    specs: Tuple[ChannelSpec, ...]

    def __call__(self, rho: DensityOperator) -> DensityOperator:
        return apply_many(self.specs, rho)


def compose(specs: Sequence[ChannelSpec]) -> Callable[[DensityOperator], DensityOperator]:
    return ChannelSequence(tuple(specs))
