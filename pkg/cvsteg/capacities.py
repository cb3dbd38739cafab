"""Closed-form rates: superdense coding, the thermal classical rate, the advantage threshold, PLOB.

Entropic rates are in nats; the PLOB bound is in bits.
"""

import math
from dataclasses import dataclass
from typing import List, Sequence

from scipy import optimize
from scipy.special import xlogy

from .errors import DomainError

BISECTION_BRACKET = (0.5, 10.0)


@dataclass(frozen=True)
class RatePoint:
    """Rates at one mean photon number. A negative ``p_max`` means no advantage."""
    nbar: float
    r: float
    quantum_rate: float
    classical_rate: float
    p_max: float


def _check_nbar(nbar: float):
    if nbar < 0:
        raise DomainError(f"mean photon number must be >= 0, got {nbar}")


def sdc_capacity(nbar: float) -> float:
    """ln(1 + nbar + nbar^2), tending to 4r."""
    _check_nbar(nbar)
    return math.log1p(nbar + nbar * nbar)


def classical_capacity(nbar: float) -> float:
    """(1 + nbar) ln(1 + nbar) - nbar ln nbar, tending to 2r."""
    _check_nbar(nbar)
    return float(xlogy(1.0 + nbar, 1.0 + nbar) - xlogy(nbar, nbar))


def advantage_p_max(nbar: float) -> float:
    """Largest eavesdropper measurement probability that keeps (1 - p) C > S.

    Returned raw; callers clamp negative values for display.
    """
    if nbar <= 0:
        raise DomainError(f"p_max needs nbar > 0, got {nbar}")
    return 1.0 - classical_capacity(nbar) / sdc_capacity(nbar)


def advantage_threshold(tol: float = 1e-6, bracket=BISECTION_BRACKET) -> float:
    """Mean photon number where p_max crosses zero, by bisection."""
    lo, hi = bracket
    if advantage_p_max(lo) >= 0 or advantage_p_max(hi) <= 0:
        raise DomainError(f"bracket {bracket} does not straddle the advantage threshold")
    return float(optimize.bisect(advantage_p_max, lo, hi, xtol=tol))


def plob_rate(eta: float) -> float:
    """-log2(1 - eta) bits per use of the pure-loss channel."""
    if not 0.0 < eta < 1.0:
        raise DomainError(f"transmissivity must lie strictly inside (0, 1), got {eta}")
    return -math.log2(1.0 - eta)


def nbar_to_r(nbar: float) -> float:
    _check_nbar(nbar)
    return math.asinh(math.sqrt(nbar))


def r_to_nbar(r: float) -> float:
    if r < 0:
        raise DomainError(f"squeezing r must be >= 0, got {r}")
    return math.sinh(r) ** 2


def nats_to_bits(value: float) -> float:
    return value / math.log(2.0)


def bits_to_nats(value: float) -> float:
    return value * math.log(2.0)


def rate_point(nbar: float) -> RatePoint:
    return RatePoint(
        nbar=nbar,
        r=nbar_to_r(nbar),
        quantum_rate=sdc_capacity(nbar),
        classical_rate=classical_capacity(nbar),
        p_max=advantage_p_max(nbar),
    )


def rate_curve(r_values: Sequence[float]) -> List[RatePoint]:
    return [rate_point(r_to_nbar(r)) for r in r_values]
