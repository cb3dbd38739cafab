"""Logical-qubit layer on square-lattice GKP states.

Each logical Pauli is read from one quadrature q_theta:

    Z: x,            c = sqrt(pi / hbar)
    X: p,            c = sqrt(pi / hbar)
    Y: (x - p)/sqrt(2), c = sqrt(2 pi / hbar)

BINNED, the default, is sgn cos(c q), the usual rounding decoder; the
DISPLACEMENT readout is cos(c q), the real part of the lattice displacement,
which reaches only about .8 on the epsilon = .1 Bell pair. Additive
Gaussian noise on a mode is folded into the readout function (Heisenberg
picture), so teleported pairs are evaluated without forming their density
operator.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import erf

from . import teleport
from .channels import ChannelSpec
from .errors import DomainError, InvalidState, ModeError, ZeroTrace
from .fock_core import (
    Cutoff,
    ModeOperator,
    PureState,
    State,
    expectation,
    hermite_functions,
    quadrature_angle,
)
from .metrics import chsh_s, concurrence, ef_from_concurrence, ppt_entangled

logger = logging.getLogger(__name__)

PAULI_LABELS = ("I", "X", "Y", "Z")
BELL_ANGLE = 3 * math.pi / 4
EXPECTATION_TOL = 0.05
READOUT_GRID_STEP = 0.005

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


class Readout(Enum):
    """How a logical Pauli is read from its quadrature."""
    BINNED = "binned"
    DISPLACEMENT = "displacement"


def _readout_axis(label: str, hbar: float) -> Tuple[float, float]:
    if label == "Z":
        return quadrature_angle("x"), math.sqrt(math.pi / hbar)
    if label == "X":
        return quadrature_angle("p"), math.sqrt(math.pi / hbar)
    if label == "Y":
        return -math.pi / 4, math.sqrt(2 * math.pi / hbar)
    raise DomainError(f"unknown Pauli label {label!r}")


def _readout_values(q: np.ndarray, c: float, readout: Readout, variance: float) -> np.ndarray:
    """Readout function averaged over Gaussian noise of the given variance."""
    if readout is Readout.DISPLACEMENT:
        return np.exp(-0.5 * c * c * variance) * np.cos(c * q)
    # sgn cos(c q) is +1 on cells |q - k d| < d/2 with k even, -1 with k odd.
    cell = math.pi / c
    sigma = math.sqrt(variance)
    reach = 8.0 * sigma + cell
    k = np.arange(math.floor((q.min() - reach) / cell), math.ceil((q.max() + reach) / cell) + 1)
    centers = k[:, None] * cell
    scale = math.sqrt(2.0) * sigma
    upper = erf((q[None, :] - centers + cell / 2) / scale)
    lower = erf((q[None, :] - centers - cell / 2) / scale)
    signs = np.where(k % 2 == 0, 1.0, -1.0)[:, None]
    return 0.5 * np.sum(signs * (upper - lower), axis=0)


@lru_cache(maxsize=64)
def _pauli_matrix(label: str, cutoff: Cutoff, readout: Readout, variance: float) -> np.ndarray:
    n_max = cutoff.n_max
    if label == "I":
        mat = np.eye(n_max, dtype=complex)
        mat.flags.writeable = False
        return mat
    theta, c = _readout_axis(label, cutoff.hbar)
    step = READOUT_GRID_STEP
    half = math.sqrt(cutoff.hbar * (2 * n_max + 1)) + 8.0 * math.sqrt(cutoff.hbar / 2 + variance)
    q = step * np.arange(-math.ceil(half / step), math.ceil(half / step) + 1)
    if readout is Readout.BINNED:
        # Cell-width floor keeps the sign function resolved on the grid.
        variance = variance + step * step / 12.0
    weights = _readout_values(q, c, readout, variance)
    psi = hermite_functions(n_max, q, cutoff.hbar)
    mat = (psi * weights) @ psi.T * step
    if theta != 0.0:
        n = np.arange(n_max)
        mat = np.exp(1j * theta * (n[:, None] - n[None, :])) * mat
    mat = np.asarray(mat, dtype=complex)
    mat.flags.writeable = False
    return mat


def pauli_operator(
    label: str,
    cutoff: Cutoff,
    readout: Readout = Readout.BINNED,
    noise: float = 0.0,
) -> ModeOperator:
    """Matrix of the single-mode readout observable, averaged over additive noise ``noise``."""
    if noise < 0:
        raise DomainError(f"noise variance must be >= 0, got {noise}")
    return ModeOperator(_pauli_matrix(label, cutoff, readout, float(noise)), cutoff)


def _check_labels(labels: str, modes: int):
    if len(labels) != modes or any(label not in PAULI_LABELS for label in labels):
        raise DomainError(f"need {modes} Pauli labels from {PAULI_LABELS}, got {labels!r}")


def logical_pauli_expectation(
    state: State,
    labels: str,
    readout: Readout = Readout.BINNED,
    noise: Sequence[float] = (0.0, 0.0),
) -> float:
    """<P1 (x) P2> (or <P>) with each mode's readout averaged over its noise variance."""
    _check_labels(labels, state.modes)
    cutoff = state.cutoff
    if state.modes == 1:
        return expectation(state, pauli_operator(labels, cutoff, readout, noise[0])).real

    first = pauli_operator(labels[0], cutoff, readout, noise[0]).mat
    second = pauli_operator(labels[1], cutoff, readout, noise[1]).mat
    if isinstance(state, PureState):
        coeffs = state.as_matrix()
        return float(np.trace(coeffs.conj().T @ first @ coeffs @ second.T).real)
    t = state.tensor4()
    return float(np.einsum("abcd,ca,db->", t, first, second, optimize=True).real)


def mixture_expectation(
    state: State,
    labels: str,
    branches: Sequence[Tuple[float, Tuple[float, float]]],
    readout: Readout = Readout.BINNED,
) -> float:
    """Weighted expectation over noise branches (weight, per-mode variances)."""
    return sum(w * logical_pauli_expectation(state, labels, readout, noise) for w, noise in branches)


def teleported_noise(
    r: float,
    channel: Optional[ChannelSpec] = None,
    gain: float = 1.0,
    hbar: float = 2.0,
    mode: int = 1,
) -> List[Tuple[float, Tuple[float, float]]]:
    """Noise branches for a pair whose ``mode`` is teleported through TMSV(r) and ``channel``."""
    if mode not in (0, 1):
        raise ModeError(f"mode index must be 0 or 1, got {mode}")
    branches = []
    for weight, noise in teleport.werner_noise_branches(r, channel, gain, hbar):
        variances = [0.0, 0.0]
        variances[mode] = noise.variance
        branches.append((weight, tuple(variances)))
    return branches


def psd_project(mat: np.ndarray) -> np.ndarray:
    """Zero the negative eigenvalues of a Hermitian matrix and rescale to unit trace."""
    mat = np.asarray(mat, dtype=complex)
    mat = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise ZeroTrace("no positive eigenvalues left after projection")
    return (vecs * (vals / total)) @ vecs.conj().T


@dataclass(frozen=True, eq=False)
class Tomogram:
    """Sixteen two-qubit Pauli expectations, the linear reconstruction and its PSD projection."""
    expectations: Dict[str, float]
    reconstructed: np.ndarray = field(repr=False)
    projected: np.ndarray = field(repr=False)

    @classmethod
    def from_expectations(cls, expectations: Dict[str, float]) -> "Tomogram":
        missing = [a + b for a, b in itertools.product(PAULI_LABELS, repeat=2) if a + b not in expectations]
        if missing:
            raise DomainError(f"missing expectations for {missing}")
        for label, value in expectations.items():
            if abs(value) > 1.0 + EXPECTATION_TOL:
                raise InvalidState(f"<{label}> = {value:.4f} lies outside [-1, 1] beyond tolerance")
        reconstructed = np.zeros((4, 4), dtype=complex)
        for first, second in itertools.product(PAULI_LABELS, repeat=2):
            pauli = np.kron(_PAULI_MATRICES[first], _PAULI_MATRICES[second])
            reconstructed += expectations[first + second] * pauli / 4.0
        return cls(dict(expectations), reconstructed, psd_project(reconstructed))

    @property
    def concurrence(self) -> float:
        return concurrence(self.projected)

    @property
    def entanglement_of_formation(self) -> float:
        return ef_from_concurrence(self.concurrence)

    @property
    def ppt(self):
        return ppt_entangled(self.projected, dims=(2, 2))


def tomography_2q(
    state: State,
    readout: Readout = Readout.BINNED,
    branches: Optional[Sequence[Tuple[float, Tuple[float, float]]]] = None,
) -> Tomogram:
    if state.modes != 2:
        raise ModeError("two-qubit tomography needs a two-mode state")
    branches = branches or [(1.0, (0.0, 0.0))]
    expectations = {
        a + b: mixture_expectation(state, a + b, branches, readout)
        for a, b in itertools.product(PAULI_LABELS, repeat=2)
    }
    return Tomogram.from_expectations(expectations)


def bell_fidelity(tomogram: Tomogram) -> float:
    """<Phi+| rho |Phi+> of the projected reconstruction."""
    return float(np.vdot(_PHI_PLUS, tomogram.projected @ _PHI_PLUS).real)


def rotate_expectations(expectations: Dict[str, float], angle: float = BELL_ANGLE) -> Dict[str, float]:
    """Expectations after exp(i angle Y / 2) on the first qubit, from the unrotated ones.

    Uses R^dagger X R = cos X - sin Z and R^dagger Z R = cos Z + sin X.
    """
    cos, sin = math.cos(angle), math.sin(angle)
    rotated = dict(expectations)
    seconds = {label[1] for label in expectations if label[0] in "XZ"}
    for second in seconds:
        x_val = expectations.get("X" + second)
        z_val = expectations.get("Z" + second)
        if x_val is None or z_val is None:
            raise DomainError(f"rotation needs both X{second} and Z{second}")
        rotated["X" + second] = cos * x_val - sin * z_val
        rotated["Z" + second] = cos * z_val + sin * x_val
    return rotated


@dataclass(frozen=True)
class BellResult:
    xx: float
    xz: float
    zx: float
    zz: float
    s: float

    @property
    def violates(self) -> bool:
        return self.s > 2.0


def bell_test(
    state: State,
    rotate: bool = True,
    channel: Optional[ChannelSpec] = None,
    r: Optional[float] = None,
    readout: Readout = Readout.BINNED,
    angle: float = BELL_ANGLE,
) -> BellResult:
    """CHSH value of a logical pair, optionally after teleporting mode B through TMSV(r) and ``channel``."""
    if state.modes != 2:
        raise ModeError("the Bell test needs a two-mode state")
    if r is None:
        if channel is not None and channel.kind != "identity":
            raise DomainError("channel noise needs the resource squeezing r")
        branches = [(1.0, (0.0, 0.0))]
    else:
        branches = teleported_noise(r, channel, hbar=state.cutoff.hbar)
    values = {
        label: mixture_expectation(state, label, branches, readout)
        for label in ("XX", "XZ", "ZX", "ZZ")
    }
    if rotate:
        values = rotate_expectations(values, angle)
    s = chsh_s(values["XX"], values["XZ"], values["ZX"], values["ZZ"])
    logger.info("Bell test (rotate=%s, r=%s): S=%.4f", rotate, r, s)
    return BellResult(values["XX"], values["XZ"], values["ZX"], values["ZZ"], s)
