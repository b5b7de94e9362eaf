"""Continued fractions and small-divisor diagnostics for a slope alpha.

Floats cannot be Liouville numbers; every classification here holds "to
working precision at the stated depth" and reports say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

QUOTIENT_CAP = 10**12
# beyond this denominator a double no longer determines the next quotient
FLOAT_DENOMINATOR_CAP = 2.0**24
# a single convergent with log q_{n+1} / log q_n beyond this is a quotient blow-up
BLOWUP_RATIO = 1.75
BLOWUP_MIN_DENOMINATOR = 10


@dataclass
class ContinuedFraction:
    quotients: list
    status: str  # "complete-depth" | "rational" | "precision"

    @property
    def terminated(self) -> bool:
        return self.status != "complete-depth"


def convergents(quotients):
    """Yield (p_n, q_n) for the partial quotients [a0; a1, a2, ...]."""
    p_prev, p = 1, quotients[0]
    q_prev, q = 0, 1
    yield p, q
    for a in quotients[1:]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield p, q


def continued_fraction(alpha, depth: int = 40) -> ContinuedFraction:
    """Partial quotients of alpha.

    ``alpha`` may be a float or an exact :class:`~fractions.Fraction`.  Floats
    are expanded exactly from their binary value but the expansion stops once
    the convergent denominator passes 2**24, where the double stops carrying
    information.
    """
    if depth > 40:
        raise ValueError("depth is limited to 40")
    exact = isinstance(alpha, (Fraction, int))
    x = Fraction(alpha)
    quotients = []
    q_prev, q = 1, 0
    status = "complete-depth"
    for _ in range(depth + 1):
        a = math.floor(x)
        if a > QUOTIENT_CAP:
            status = "precision"
            break
        quotients.append(int(a))
        q_prev, q = q, a * q + q_prev
        frac = x - a
        if frac == 0:
            status = "rational"
            break
        x = 1 / frac
        if not exact and q > FLOAT_DENOMINATOR_CAP:
            status = "precision"
            break
    if status == "precision" and not exact:
        # a huge next quotient right after a short expansion means alpha is a
        # rational number at double precision
        p_n, q_n = list(convergents(quotients))[-1]
        if abs(p_n / q_n - float(alpha)) <= 4 * np.finfo(float).eps * max(1.0, abs(float(alpha))) and q_n < 2**20:
            status = "rational"
    return ContinuedFraction(quotients, status)


def from_quotients(quotients) -> Fraction:
    p, q = list(convergents(list(quotients)))[-1]
    return Fraction(p, q)


def min_divisor(alpha: float, N: int, with_argmin: bool = False):
    """Brute-force min |k1 + alpha k2| over 0 < |k|_inf <= N."""
    if N < 1:
        raise ValueError("N must be at least 1")
    side = np.arange(-N, N + 1)
    k1, k2 = np.meshgrid(side, side, indexing="ij")
    vals = np.abs(k1 + float(alpha) * k2)
    vals[N, N] = np.inf
    idx = np.unravel_index(np.argmin(vals), vals.shape)
    best = float(vals[idx])
    if with_argmin:
        return best, (int(k1[idx]), int(k2[idx]))
    return best


@dataclass
class DiophantineProfile:
    alpha: float
    quotients: list
    denominators: list
    status: str
    exponent_estimate: float | None
    blowup_ratio: float | None
    min_divisors: dict = field(default_factory=dict)  # N -> min divisor
    caveat: str = "to working precision at the stated depth"

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "partial_quotients": self.quotients,
            "convergent_denominators": self.denominators,
            "status": self.status,
            "exponent_estimate": self.exponent_estimate,
            "blowup_ratio": self.blowup_ratio,
            "min_divisors": {str(k): v for k, v in self.min_divisors.items()},
            "caveat": self.caveat,
        }


def profile(alpha, depth: int = 30, N_max: int = 16, truncated: bool = False) -> DiophantineProfile:
    """Continued-fraction profile of alpha.

    ``truncated=True`` declares an exact rational input to be a finite
    truncation of an irrational number (a partial sum, say): its terminating
    expansion is then not reported as rational.
    """
    cf = continued_fraction(alpha, depth)
    status = cf.status
    if truncated and status == "rational":
        status = "truncated"
    dens = [q for _, q in convergents(cf.quotients)]
    logs = [(math.log(a), math.log(b)) for a, b in zip(dens, dens[1:]) if a >= 2]
    exponent = None
    if len(logs) >= 2:
        x = np.array([u for u, _ in logs])
        y = np.array([w for _, w in logs])
        slope = float(np.polyfit(x, y, 1)[0])
        exponent = 1.0 + slope
    tail = [w / u for u, w in logs if math.exp(u) >= BLOWUP_MIN_DENOMINATOR]
    return DiophantineProfile(
        alpha=float(alpha),
        quotients=cf.quotients,
        denominators=dens,
        status=status,
        exponent_estimate=exponent,
        blowup_ratio=max(tail) if tail else None,
        min_divisors={N: min_divisor(float(alpha), N) for N in range(1, N_max + 1)},
    )


@dataclass
class Classification:
    label: str  # "diophantine-like" | "liouville-like" | "rational" | "insufficient-depth"
    exponent: float | None
    caveat: str = "to working precision at the stated depth"


def classify(prof: DiophantineProfile) -> Classification:
    """Label the approximation regime of a profile.

    A bounded ratio log q_{n+1} / log q_n is read as diophantine-like; a
    convergent whose successor's denominator blows up past the power
    BLOWUP_RATIO is read as liouville-like.
    """
    if prof.status == "rational":
        return Classification("rational", None)
    if prof.exponent_estimate is None or prof.blowup_ratio is None or len(prof.denominators) < 5:
        return Classification("insufficient-depth", prof.exponent_estimate)
    if prof.blowup_ratio >= BLOWUP_RATIO:
        return Classification("liouville-like", 1.0 + prof.blowup_ratio)
    return Classification("diophantine-like", prof.exponent_estimate)


def liouville_partial_sum(terms: int) -> Fraction:
    """sum_{n=1}^{terms} 10^(-n!) as an exact fraction."""
    return sum((Fraction(1, 10 ** math.factorial(n)) for n in range(1, terms + 1)), Fraction(0))
