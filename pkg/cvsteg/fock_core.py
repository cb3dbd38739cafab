"""Truncated Fock-space linear algebra: states, operators, traces and marginals."""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .errors import (
    CutoffMismatch,
    CutoffTooSmall,
    DimMismatch,
    DomainError,
    InvalidState,
    ModeError,
)

logger = logging.getLogger(__name__)

TAU_NORM = 1e-6
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8
DEFAULT_HBAR = 2.0

# Mode indices of a two-mode resource: A stays with the sender, B travels.
MODE_A = 0
MODE_B = 1

Quadrature = Union[str, float]


@dataclass(frozen=True)
class Cutoff:
    """Fock basis {|0>, ..., |n_max - 1>} plus the hbar convention."""
    n_max: int
    hbar: float = DEFAULT_HBAR
    tau_norm: float = TAU_NORM

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DomainError(f"n_max must be an integer >= 1, got {self.n_max}")
        if self.hbar <= 0:
            raise DomainError(f"hbar must be positive, got {self.hbar}")
        if not 0 < self.tau_norm < 1:
            raise DomainError(f"tau_norm must lie in (0, 1), got {self.tau_norm}")

    def dim(self, modes: int = 1) -> int:
        return self.n_max ** modes


def _check_modes(modes: int):
    if modes not in (1, 2):
        raise ModeError(f"only one- and two-mode objects are supported, got {modes}")


def _warn_lost_mass(kind: str, lost: float, cutoff: Cutoff, stacklevel: int = 3):
    logger.debug("%s lost %.3e of its mass at n_max=%d", kind, lost, cutoff.n_max)
    if lost > cutoff.tau_norm:
        warnings.warn(
            f"{kind} lost {lost:.2e} of its mass to the Fock cutoff n_max={cutoff.n_max}",
            CutoffTooSmall,
            stacklevel=stacklevel,
        )


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector over one mode (length n_max) or two modes (n_max**2)."""
    amps: np.ndarray
    cutoff: Cutoff
    modes: int = 1

    def __post_init__(self):
        _check_modes(self.modes)
        amps = np.array(self.amps, dtype=complex).ravel()
        if amps.size != self.cutoff.dim(self.modes):
            raise DimMismatch(
                f"{self.modes}-mode state at n_max={self.cutoff.n_max} needs "
                f"{self.cutoff.dim(self.modes)} amplitudes, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)
        if self.norm > 1 + HERMITIAN_TOL:
            raise InvalidState(f"state norm {self.norm:.12f} exceeds 1")
        _warn_lost_mass("pure state", self.lost_mass, self.cutoff, stacklevel=4)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def lost_mass(self) -> float:
        return max(0.0, 1.0 - self.norm)

    def as_matrix(self) -> np.ndarray:
        """Two-mode amplitudes as an (n_max, n_max) coefficient matrix."""
        if self.modes != 2:
            raise ModeError("as_matrix needs a two-mode state")
        n = self.cutoff.n_max
        return self.amps.reshape(n, n)

    def to_density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amps, self.amps.conj()), self.cutoff, self.modes)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive, trace-at-most-one matrix over one or two modes.

    A trace below 1 - tau_norm is reported with a CutoffTooSmall warning rather
    than renormalized, so truncation losses stay visible downstream.
    """
    mat: np.ndarray
    cutoff: Cutoff
    modes: int = 1

    def __post_init__(self):
        _check_modes(self.modes)
        mat = np.array(self.mat, dtype=complex)
        dim = self.cutoff.dim(self.modes)
        if mat.shape != (dim, dim):
            raise DimMismatch(f"expected a {dim}x{dim} matrix, got {mat.shape}")
        skew = np.max(np.abs(mat - mat.conj().T)) if dim else 0.0
        if skew > HERMITIAN_TOL:
            raise InvalidState(f"matrix is not Hermitian (max deviation {skew:.2e})")
        mat = 0.5 * (mat + mat.conj().T)
        lowest = float(np.linalg.eigvalsh(mat)[0])
        if lowest < -HERMITIAN_TOL:
            raise InvalidState(f"matrix has a negative eigenvalue {lowest:.2e}")
        trace = float(np.trace(mat).real)
        if trace > 1 + HERMITIAN_TOL:
            raise InvalidState(f"trace {trace:.12f} exceeds 1")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        _warn_lost_mass("density operator", 1.0 - trace, self.cutoff, stacklevel=4)

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    @property
    def lost_mass(self) -> float:
        return max(0.0, 1.0 - self.trace)

    @property
    def purity(self) -> float:
        return float(np.vdot(self.mat, self.mat).real)

    def tensor4(self) -> np.ndarray:
        """Two-mode matrix as a 4-index array [a, b, a', b']."""
        if self.modes != 2:
            raise ModeError("tensor4 needs a two-mode operator")
        n = self.cutoff.n_max
        return self.mat.reshape(n, n, n, n)


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Matrix acting on the truncated space of one or two modes.

    With ``unitary=True`` the constructor checks U^dagger U = 1 away from the
    top Fock level, where truncation is allowed to break unitarity.
    """
    mat: np.ndarray
    cutoff: Cutoff
    modes: int = 1
    unitary: bool = False

    def __post_init__(self):
        _check_modes(self.modes)
        mat = np.array(self.mat, dtype=complex)
        dim = self.cutoff.dim(self.modes)
        if mat.shape != (dim, dim):
            raise DimMismatch(f"expected a {dim}x{dim} operator, got {mat.shape}")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        if self.unitary:
            interior = _interior_indices(self.cutoff, self.modes)
            gram = (mat.conj().T @ mat)[np.ix_(interior, interior)]
            defect = np.max(np.abs(gram - np.eye(len(interior)))) if len(interior) else 0.0
            if defect > UNITARY_TOL:
                raise InvalidState(f"operator is not unitary on the interior block ({defect:.2e})")

    @property
    def dag(self) -> "ModeOperator":
        return ModeOperator(self.mat.conj().T, self.cutoff, self.modes)

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        check_cutoffs(self.cutoff, other.cutoff)
        if self.modes != other.modes:
            raise DimMismatch("operators act on different numbers of modes")
        return ModeOperator(self.mat @ other.mat, self.cutoff, self.modes)

    def apply(self, state: PureState) -> PureState:
        check_cutoffs(self.cutoff, state.cutoff)
        if self.modes != state.modes:
            raise DimMismatch("operator and state have different mode counts")
        return PureState(self.mat @ state.amps, self.cutoff, self.modes)


def _interior_indices(cutoff: Cutoff, modes: int) -> np.ndarray:
    levels = np.arange(cutoff.n_max - 1)
    if modes == 1:
        return levels
    return (levels[:, None] * cutoff.n_max + levels[None, :]).ravel()


def check_cutoffs(first: Cutoff, second: Cutoff):
    if first != second:
        raise CutoffMismatch(f"cutoffs differ: {first} vs {second}")


State = Union[PureState, DensityOperator]


def density_matrix(state: State) -> np.ndarray:
    """Matrix of a state, promoting pure states on the fly."""
    if isinstance(state, PureState):
        return np.outer(state.amps, state.amps.conj())
    return state.mat


# ----------------------------------------------------------------------------
# Cutoff selection
# ----------------------------------------------------------------------------

def auto_cutoff(
    r: Optional[float] = None,
    nbar: Optional[float] = None,
    tau_norm: float = TAU_NORM,
    hbar: float = DEFAULT_HBAR,
    floor: int = 8,
) -> Cutoff:
    """Smallest n_max whose thermal (or TMSV) tail (nbar/(nbar+1))^n_max < tau_norm."""
    if r is not None:
        if r < 0:
            raise DomainError(f"squeezing r must be >= 0, got {r}")
        nbar = math.sinh(r) ** 2
    if nbar is None:
        raise DomainError("auto_cutoff needs r or nbar")
    if nbar < 0:
        raise DomainError(f"nbar must be >= 0, got {nbar}")
    if nbar == 0:
        return Cutoff(floor, hbar, tau_norm)
    ratio = nbar / (nbar + 1.0)
    n_max = max(floor, math.ceil(math.log(tau_norm) / math.log(ratio)))
    logger.debug("auto cutoff for nbar=%.4f: n_max=%d", nbar, n_max)
    return Cutoff(n_max, hbar, tau_norm)


def gkp_cutoff(epsilon: float, tau_norm: float = TAU_NORM, hbar: float = DEFAULT_HBAR) -> Cutoff:
    """n_max such that the exp(-epsilon n) envelope has shed all but tau_norm."""
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    n_max = math.ceil(math.log(1.0 / tau_norm) / (2.0 * epsilon)) + 10
    return Cutoff(n_max, hbar, tau_norm)


# ----------------------------------------------------------------------------
# Elementary operators
# ----------------------------------------------------------------------------

def annihilation(cutoff: Cutoff) -> ModeOperator:
    """Lowering operator, <m|a|n> = sqrt(n) delta_{m, n-1}."""
    return ModeOperator(np.diag(np.sqrt(np.arange(1, cutoff.n_max)), k=1), cutoff)


def creation(cutoff: Cutoff) -> ModeOperator:
    return annihilation(cutoff).dag


def number_operator(cutoff: Cutoff) -> ModeOperator:
    return ModeOperator(np.diag(np.arange(cutoff.n_max, dtype=float)), cutoff)


def parity(cutoff: Cutoff) -> ModeOperator:
    return ModeOperator(np.diag((-1.0) ** np.arange(cutoff.n_max)), cutoff)


def identity(cutoff: Cutoff, modes: int = 1) -> ModeOperator:
    return ModeOperator(np.eye(cutoff.dim(modes)), cutoff, modes)


def quadrature_angle(which: Quadrature) -> float:
    if which == "x":
        return 0.0
    if which == "p":
        return math.pi / 2
    if isinstance(which, str):
        raise DomainError(f"quadrature must be 'x', 'p' or an angle, got {which!r}")
    return float(which)


def quadrature(cutoff: Cutoff, which: Quadrature = "x") -> ModeOperator:
    """q_theta = sqrt(hbar/2) (a e^{-i theta} + a^dagger e^{i theta}); theta=0 is x, pi/2 is p."""
    theta = quadrature_angle(which)
    a = annihilation(cutoff).mat
    q = math.sqrt(cutoff.hbar / 2) * (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta))
    return ModeOperator(q, cutoff)


def local(op: ModeOperator, mode: int) -> ModeOperator:
    """Lift a single-mode operator onto one mode of the two-mode space."""
    if op.modes != 1:
        raise ModeError("local() lifts single-mode operators only")
    eye = np.eye(op.cutoff.n_max)
    mat = np.kron(op.mat, eye) if mode == MODE_A else np.kron(eye, op.mat)
    return ModeOperator(mat, op.cutoff, 2)


def coherent_tail(alpha: complex, n_max: int) -> float:
    """Mass of the coherent state |alpha> beyond the cutoff (Poisson tail)."""
    mean = abs(alpha) ** 2
    if mean == 0:
        return 0.0
    return float(gammainc(n_max, mean))


def displacement(alpha: complex, cutoff: Cutoff) -> ModeOperator:
    """D(alpha) = exp(alpha a^dagger - alpha^* a) by dense scaling-and-squaring."""
    tail = coherent_tail(alpha, cutoff.n_max)
    if abs(alpha) ** 2 > cutoff.n_max / 4 or tail > cutoff.tau_norm:
        warnings.warn(
            f"displacement |alpha|^2={abs(alpha) ** 2:.3g} is large for n_max={cutoff.n_max} "
            f"(displaced vacuum loses {tail:.2e})",
            CutoffTooSmall,
            stacklevel=2,
        )
    a = annihilation(cutoff).mat
    return ModeOperator(expm(alpha * a.conj().T - np.conj(alpha) * a), cutoff, unitary=True)


def displacement_block(alpha: complex, cutoff: Cutoff) -> np.ndarray:
    """Accurate <m|D(alpha)|n> for m, n < n_max.

    Exponentiates on a padded space wide enough for every column to stay
    inside it, then crops. Not unitary: rows it drops carry the mass that the
    displaced states move above the cutoff.
    """
    n = cutoff.n_max
    amp = abs(alpha)
    pad = math.ceil(amp ** 2 + 2 * amp * math.sqrt(n) + 6 * (math.sqrt(n) + amp)) + 10
    big = np.diag(np.sqrt(np.arange(1, n + pad)), k=1)
    return expm(alpha * big.conj().T - np.conj(alpha) * big)[:n, :n]


def two_mode_squeezer(r: float, cutoff: Cutoff) -> ModeOperator:
    """exp(r (a^dagger b^dagger - a b)) on the two-mode space."""
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    tail = math.tanh(r) ** (2 * cutoff.n_max)
    _warn_lost_mass("two-mode squeezed vacuum", tail, cutoff)
    a = annihilation(cutoff).mat
    eye = np.eye(cutoff.n_max)
    a_mode, b_mode = np.kron(a, eye), np.kron(eye, a)
    generator = r * (a_mode.conj().T @ b_mode.conj().T - a_mode @ b_mode)
    return ModeOperator(expm(generator), cutoff, 2, unitary=True)


def beamsplitter(eta: float, cutoff: Cutoff) -> ModeOperator:
    """Two-mode beamsplitter of transmissivity eta.

    U a U^dagger = sqrt(eta) a + sqrt(1-eta) b, so |alpha>|0> goes to
    |sqrt(eta) alpha>|sqrt(1-eta) alpha>; at eta=0 this is the swap
    |alpha>|beta> -> |-beta>|alpha>.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {eta}")
    theta = math.acos(math.sqrt(eta))
    a = annihilation(cutoff).mat
    eye = np.eye(cutoff.n_max)
    a_mode, b_mode = np.kron(a, eye), np.kron(eye, a)
    generator = theta * (a_mode @ b_mode.conj().T - a_mode.conj().T @ b_mode)
    return ModeOperator(expm(generator), cutoff, 2, unitary=True)


# ----------------------------------------------------------------------------
# Composition, traces, expectations
# ----------------------------------------------------------------------------

def tensor(first: State, second: State) -> State:
    """Kronecker product of two single-mode states of the same kind."""
    check_cutoffs(first.cutoff, second.cutoff)
    if first.modes != 1 or second.modes != 1:
        raise ModeError("tensor combines two single-mode states")
    if isinstance(first, PureState) and isinstance(second, PureState):
        return PureState(np.kron(first.amps, second.amps), first.cutoff, 2)
    if isinstance(first, DensityOperator) and isinstance(second, DensityOperator):
        return DensityOperator(np.kron(first.mat, second.mat), first.cutoff, 2)
    raise TypeError("tensor needs two PureStates or two DensityOperators")


def partial_trace(rho: DensityOperator, keep: int) -> DensityOperator:
    """Reduced state of mode ``keep`` (0 = A, 1 = B)."""
    if rho.modes != 2:
        raise ModeError("partial_trace needs a two-mode state")
    if keep not in (MODE_A, MODE_B):
        raise ModeError(f"mode index must be 0 or 1, got {keep}")
    t = rho.tensor4()
    mat = np.einsum("abcb->ac", t) if keep == MODE_A else np.einsum("abad->bd", t)
    return DensityOperator(mat, rho.cutoff, 1)


def expectation(state: State, op: ModeOperator) -> complex:
    """Tr(rho op), or <psi|op|psi> for pure states."""
    check_cutoffs(state.cutoff, op.cutoff)
    if state.modes != op.modes:
        raise DimMismatch(f"{state.modes}-mode state with a {op.modes}-mode operator")
    if isinstance(state, PureState):
        return complex(np.vdot(state.amps, op.mat @ state.amps))
    return complex(np.einsum("ij,ji->", state.mat, op.mat))


def apply_kraus(rho: np.ndarray, kraus: Sequence[np.ndarray], n_max: int, modes: int, mode: int = 0) -> np.ndarray:
    """sum_k K rho K^dagger with the single-mode family acting on ``mode``."""
    if modes == 1:
        return sum(k @ rho @ k.conj().T for k in kraus)
    t = rho.reshape(n_max, n_max, n_max, n_max)
    out = np.zeros_like(t)
    for k in kraus:
        if mode == MODE_A:
            half = np.einsum("ca,abxy->cbxy", k, t, optimize=True)
            out += np.einsum("cbxy,dx->cbdy", half, k.conj(), optimize=True)
        else:
            half = np.einsum("cb,abxy->acxy", k, t, optimize=True)
            out += np.einsum("acxy,dy->acxd", half, k.conj(), optimize=True)
    return out.reshape(n_max * n_max, n_max * n_max)


# ----------------------------------------------------------------------------
# Quadrature representation
# ----------------------------------------------------------------------------

def hermite_functions(n_max: int, q: np.ndarray, hbar: float = DEFAULT_HBAR) -> np.ndarray:
    """Position wavefunctions <q|n>, shape (n_max, len(q)).

    Three-term recurrence on the normalized functions; vacuum variance hbar/2.
    """
    xi = np.asarray(q, dtype=float) / math.sqrt(hbar)
    psi = np.zeros((n_max, xi.size))
    psi[0] = (math.pi * hbar) ** -0.25 * np.exp(-0.5 * xi ** 2)
    if n_max > 1:
        psi[1] = math.sqrt(2.0) * xi * psi[0]
    for n in range(1, n_max - 1):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def quadrature_kets(cutoff: Cutoff, q: np.ndarray, which: Quadrature = "x") -> np.ndarray:
    """Columns are <n|q_theta> = e^{i n theta} <q|n> for each grid point."""
    theta = quadrature_angle(which)
    psi = hermite_functions(cutoff.n_max, q, cutoff.hbar)
    if theta == 0.0:
        return psi.astype(complex)
    return np.exp(1j * theta * np.arange(cutoff.n_max))[:, None] * psi


def quadrature_marginal(rho: State, which: Quadrature, grid: np.ndarray) -> np.ndarray:
    """Probability density <q|rho|q> of a single-mode state on ``grid``."""
    if rho.modes != 1:
        raise ModeError("quadrature_marginal needs a single-mode state")
    kets = quadrature_kets(rho.cutoff, grid, which)
    if isinstance(rho, PureState):
        return np.abs(kets.conj().T @ rho.amps) ** 2
    return np.einsum("mg,mn,ng->g", kets.conj(), rho.mat, kets, optimize=True).real
