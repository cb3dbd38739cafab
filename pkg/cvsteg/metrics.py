"""State comparison, entropies, bounds, Wigner functions and entanglement witnesses.

Fidelity uses the squared convention F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
so F(|psi>, |phi>) = |<psi|phi>|^2 and sech(r - r') is the square root of the
thermal-state fidelity. Entropies are in nats unless a name says otherwise.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr, xlogy

from .errors import DimMismatch, DomainError, InvalidState, ModeError
from .fock_core import DensityOperator, PureState, State, density_matrix

logger = logging.getLogger(__name__)

PPT_TOL = 1e-8
PURE_TOL = 1e-9
DEFAULT_FIDELITY_TARGET = 0.99

Matrix = Union[State, np.ndarray]


def _as_matrix(state: Matrix) -> np.ndarray:
    if isinstance(state, (PureState, DensityOperator)):
        return density_matrix(state)
    mat = np.asarray(state, dtype=complex)
    if mat.ndim == 1:
        return np.outer(mat, mat.conj())
    return mat


def _pair(rho: Matrix, sigma: Matrix) -> Tuple[np.ndarray, np.ndarray]:
    first, second = _as_matrix(rho), _as_matrix(sigma)
    if first.shape != second.shape:
        raise DimMismatch(f"cannot compare {first.shape} with {second.shape}")
    return first, second


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def _is_pure(state: Matrix) -> bool:
    if isinstance(state, PureState):
        return True
    return purity(state) > 1.0 - PURE_TOL


def fidelity(rho: Matrix, sigma: Matrix) -> float:
    """Uhlmann fidelity (squared convention), clipped to [0, 1]."""
    if isinstance(rho, PureState) or isinstance(sigma, PureState):
        pure, other = (rho, sigma) if isinstance(rho, PureState) else (sigma, rho)
        other_mat = _as_matrix(other)
        if other_mat.shape[0] != pure.amps.size:
            raise DimMismatch(f"cannot compare dimension {pure.amps.size} with {other_mat.shape}")
        value = np.vdot(pure.amps, other_mat @ pure.amps).real
        return float(np.clip(value, 0.0, 1.0))
    first, second = _pair(rho, sigma)
    root = _psd_sqrt(first)
    inner = np.linalg.eigvalsh(root @ second @ root)
    value = np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2
    return float(np.clip(value, 0.0, 1.0))


def trace_distance(rho: Matrix, sigma: Matrix) -> float:
    """Half the trace norm of rho - sigma."""
    first, second = _pair(rho, sigma)
    diff = first - second
    diff = 0.5 * (diff + diff.conj().T)
    return float(min(1.0, 0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff)))))


def purity(rho: Matrix) -> float:
    mat = _as_matrix(rho)
    return float(np.vdot(mat, mat).real)


def thermal_sqrt_fidelity(r: float, r_prime: float) -> float:
    """sqrt(F) between thermal marginals of TMSV(r) and TMSV(r'), equal to sech(r - r')."""
    if r < 0 or r_prime < 0:
        raise DomainError("squeezing parameters must be >= 0")
    return 1.0 / math.cosh(r - r_prime)


def thermal_fidelity_closed(nbar: float, mbar: float) -> float:
    """F(thermal(nbar), thermal(mbar)) = (sqrt((1+n)(1+m)) - sqrt(nm))^-2."""
    if nbar < 0 or mbar < 0:
        raise DomainError("mean photon numbers must be >= 0")
    return (math.sqrt((1 + nbar) * (1 + mbar)) - math.sqrt(nbar * mbar)) ** -2


def squeezing_margin(fidelity_target: float = DEFAULT_FIDELITY_TARGET) -> float:
    """Extra squeezing dr with sech^2(dr) equal to the target fidelity."""
    if not 0 < fidelity_target <= 1:
        raise DomainError(f"fidelity target must lie in (0, 1], got {fidelity_target}")
    return math.acosh(1.0 / math.sqrt(fidelity_target))


def margin_db(delta_r: float) -> float:
    return 20.0 * delta_r / math.log(10.0)


def entropy(rho: Matrix) -> float:
    """Von Neumann entropy in nats."""
    vals = np.linalg.eigvalsh(_as_matrix(rho))
    return float(np.sum(entr(np.clip(vals, 0.0, None))))


def thermal_entropy(nbar: float) -> float:
    """(nbar + 1) ln(nbar + 1) - nbar ln nbar."""
    if nbar < 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar}")
    return float(xlogy(nbar + 1.0, nbar + 1.0) - xlogy(nbar, nbar))


def ef_margin_curve(r_values: Sequence[float], fidelity_target: float = DEFAULT_FIDELITY_TARGET) -> np.ndarray:
    """Percent gain in entanglement of formation from squeezing past r by the fidelity margin."""
    r = np.asarray(r_values, dtype=float)
    if np.any(r <= 0):
        raise DomainError("entanglement margin needs r > 0 (zero base entropy)")
    delta = squeezing_margin(fidelity_target)
    base = np.array([thermal_entropy(math.sinh(v) ** 2) for v in r])
    boosted = np.array([thermal_entropy(math.sinh(v + delta) ** 2) for v in r])
    return 100.0 * (boosted - base) / base


@dataclass(frozen=True)
class FvdgBounds:
    """Fidelity sandwich from the trace distance; the upper bound needs a pure argument."""
    lower: float
    upper: float
    upper_valid: bool
    trace_distance: float


def fvdg_bounds(rho: Matrix, sigma: Matrix) -> FvdgBounds:
    distance = trace_distance(rho, sigma)
    return FvdgBounds(
        lower=(1.0 - distance) ** 2,
        upper=1.0 - distance ** 2,
        upper_valid=_is_pure(rho) or _is_pure(sigma),
        trace_distance=distance,
    )


def fvdg_mixture_lower(p: float, td_th: float, td_c: float) -> float:
    """Lower bound on F(p rho_th + (1-p) rho_c, rho_0) from the component trace distances."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    for name, value in (("td_th", td_th), ("td_c", td_c)):
        if not 0.0 <= value <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return (p * (1.0 - td_th) + (1.0 - p) * (1.0 - td_c)) ** 2


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """W(x, p) sampled on a rectangular grid; ``values[i, j]`` is at (x[j], p[i])."""
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.x.size < 2 or self.p.size < 2:
            raise DomainError("Wigner grid needs at least two points per axis")
        if np.any(np.diff(self.x) <= 0) or np.any(np.diff(self.p) <= 0):
            raise DomainError("Wigner grid axes must be increasing")
        if self.values.shape != (self.p.size, self.x.size):
            raise DimMismatch(f"values shape {self.values.shape} does not match the axes")
        if not np.all(np.isfinite(self.values)):
            raise InvalidState("Wigner values are not finite")

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @property
    def p_min(self) -> float:
        return float(self.p[0])

    @property
    def p_max(self) -> float:
        return float(self.p[-1])

    @property
    def nx(self) -> int:
        return self.x.size

    @property
    def np(self) -> int:
        return self.p.size

    def integral(self) -> float:
        """Tr(rho): half the phase-space integral under the 2/(pi hbar) scale."""
        dx = (self.x_max - self.x_min) / (self.nx - 1)
        dp = (self.p_max - self.p_min) / (self.np - 1)
        return float(self.values.sum() * dx * dp / 2.0)

    def rows(self):
        """(x, p, W) triples, p-major."""
        for i, p in enumerate(self.p):
            for j, x in enumerate(self.x):
                yield float(x), float(p), float(self.values[i, j])


def _laguerre_series(order: int, x: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Clenshaw sum of b_n (-1)^n sqrt(L! n! / (L+n)!) L_n^L(x) for L = ``order``."""
    if len(coeffs) == 1:
        y0, y1 = coeffs[0], 0
    elif len(coeffs) == 2:
        y0, y1 = coeffs[0], coeffs[1]
    else:
        k = len(coeffs)
        y0, y1 = coeffs[-2], coeffs[-1]
        for i in range(3, len(coeffs) + 1):
            k -= 1
            y0, y1 = (
                coeffs[-i] - y1 * math.sqrt((k - 1) * (order + k - 1) / ((order + k) * k)),
                y0 - y1 * ((order + 2 * k - 1) - x) / math.sqrt((order + k) * k),
            )
    return y0 - y1 * ((order + 1) - x) / math.sqrt(order + 1)


def displaced_parity(rho: Matrix, alpha: np.ndarray) -> np.ndarray:
    """Tr[rho D(alpha) Pi D(alpha)^dagger] for every entry of ``alpha``, in closed form."""
    mat = _as_matrix(rho)
    size = mat.shape[0]
    doubled = mat * (2.0 * np.ones((size, size)) - np.eye(size))
    two_alpha = 2.0 * np.asarray(alpha, dtype=complex)
    radius = np.abs(two_alpha) ** 2
    acc = doubled[0, -1] * np.ones_like(two_alpha)
    order = size - 1
    while order > 0:
        order -= 1
        acc = _laguerre_series(order, radius, np.diag(doubled, order)) + acc * two_alpha / math.sqrt(order + 1)
    return acc.real * np.exp(-0.5 * radius)


def wigner(rho: State, xvec: Sequence[float], pvec: Sequence[float]) -> WignerGrid:
    """W = (2 / (pi hbar)) Tr[rho D(alpha) Pi D(alpha)^dagger] with alpha = (x + ip) / sqrt(2 hbar)."""
    if rho.modes != 1:
        raise ModeError("wigner needs a single-mode state")
    hbar = rho.cutoff.hbar
    x = np.asarray(xvec, dtype=float)
    p = np.asarray(pvec, dtype=float)
    xx, pp = np.meshgrid(x, p)
    alpha = (xx + 1j * pp) / math.sqrt(2.0 * hbar)
    values = 2.0 / (math.pi * hbar) * displaced_parity(rho, alpha)
    return WignerGrid(x, p, values)


def wigner_min(grid: WignerGrid) -> float:
    return float(grid.values.min())


def partial_transpose(rho: Matrix, dims: Tuple[int, int]) -> np.ndarray:
    """Transpose of the second subsystem."""
    mat = _as_matrix(rho)
    da, db = dims
    if mat.shape != (da * db, da * db):
        raise DimMismatch(f"matrix {mat.shape} does not split as {dims}")
    return mat.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def _dims(rho: Matrix, dims) -> Tuple[int, int]:
    if dims is not None:
        return dims
    if isinstance(rho, (PureState, DensityOperator)):
        if rho.modes != 2:
            raise ModeError("entanglement tests need a two-mode state")
        n = rho.cutoff.n_max
        return n, n
    size = _as_matrix(rho).shape[0]
    side = int(round(math.sqrt(size)))
    if side * side != size:
        raise DimMismatch("pass dims for non-square bipartitions")
    return side, side


def log_negativity(rho: Matrix, dims: Tuple[int, int] = None) -> float:
    vals = np.linalg.eigvalsh(partial_transpose(rho, _dims(rho, dims)))
    return float(math.log(np.sum(np.abs(vals))))


@dataclass(frozen=True)
class PptResult:
    """Peres-Horodecki verdict; truthy when the state is entangled."""
    entangled: bool
    min_eigenvalue: float
    log_negativity: float

    def __bool__(self) -> bool:
        return self.entangled


def ppt_entangled(rho: Matrix, dims: Tuple[int, int] = None, tol: float = PPT_TOL) -> PptResult:
    vals = np.linalg.eigvalsh(partial_transpose(rho, _dims(rho, dims)))
    lowest = float(vals[0])
    return PptResult(lowest < -tol, lowest, float(math.log(np.sum(np.abs(vals)))))


_SIGMA_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def _check_two_qubit(mat: np.ndarray):
    if mat.shape != (4, 4):
        raise InvalidState(f"expected a 4x4 two-qubit density matrix, got {mat.shape}")
    if np.max(np.abs(mat - mat.conj().T)) > 1e-8:
        raise InvalidState("two-qubit matrix is not Hermitian")
    if np.linalg.eigvalsh(mat)[0] < -1e-8:
        raise InvalidState("two-qubit matrix is not positive")
    if abs(np.trace(mat).real - 1.0) > 1e-6:
        raise InvalidState("two-qubit matrix does not have unit trace")


def concurrence(rho: Matrix) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    mat = _as_matrix(rho)
    _check_two_qubit(mat)
    flipped = _SIGMA_YY @ mat.conj() @ _SIGMA_YY
    vals = np.sort(np.sqrt(np.clip(np.linalg.eigvals(mat @ flipped).real, 0.0, None)))[::-1]
    return float(max(0.0, vals[0] - vals[1] - vals[2] - vals[3]))


def binary_entropy(p: float) -> float:
    """h(p) in bits."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return float((entr(p) + entr(1.0 - p)) / math.log(2.0))


def ef_from_concurrence(c: float) -> float:
    """Entanglement of formation in ebits, h((1 + sqrt(1 - C^2)) / 2)."""
    if not 0.0 <= c <= 1.0 + 1e-12:
        raise DomainError(f"concurrence must lie in [0, 1], got {c}")
    c = min(c, 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def chsh_s(exp_xx: float, exp_xz: float, exp_zx: float, exp_zz: float) -> float:
    """S = |<XX> + <XZ> - <ZX> + <ZZ>|."""
    values: Dict[str, float] = {"XX": exp_xx, "XZ": exp_xz, "ZX": exp_zx, "ZZ": exp_zz}
    for label, value in values.items():
        if not -1.0 - 1e-9 <= value <= 1.0 + 1e-9:
            raise DomainError(f"<{label}> = {value} lies outside [-1, 1]")
    return abs(exp_xx + exp_xz - exp_zx + exp_zz)
